#include "pitpn/romeo.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <map>
#include <set>
#include <sstream>

namespace pitpn::io {

namespace {

namespace pt = boost::property_tree;

std::string attr(const pt::ptree& node, const std::string& name, const std::string& fallback = {}) {
  return node.get<std::string>("<xmlattr>." + name, fallback);
}

bool has_attr(const pt::ptree& node, const std::string& name) {
  return node.get_child_optional("<xmlattr>." + name).has_value();
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct Importer {
  RomeoImport out;
  std::map<std::string, std::size_t> place_ref;
  std::map<std::string, std::size_t> transition_ref;

  Net& net() { return out.net; }

  LinExpr expression(const std::string& text, const std::string& where) {
    try {
      return parse_linear(text, parameter_symbols(net()));
    } catch (const ParseError& e) {
      throw ParseError(where + ": cannot read '" + text + "' (" + e.what() + ")");
    }
  }

  std::size_t resolve(const std::map<std::string, std::size_t>& refs, const std::string& key, const std::string& what) {
    auto it = refs.find(key);
    if (it == refs.end()) throw ParseError("arc refers to unknown " + what + " '" + key + "'");
    return it->second;
  }

  void parameters(const pt::ptree& root) {
    for (const auto& [tag, node] : root) {
      if (tag != "parameter") continue;
      std::string name = attr(node, "name", attr(node, "label"));
      if (name.empty()) throw ParseError("parameter without a name");
      std::string type = attr(node, "type", "real");
      if (type != "real" && type != "int") throw ParseError("parameter '" + name + "' has unknown type '" + type + "'");
      net().params.push_back(Param{name, type == "int" ? Sort::Int : Sort::Real});
    }
  }

  void places(const pt::ptree& root) {
    for (const auto& [tag, node] : root) {
      if (tag != "place") continue;
      std::string label = attr(node, "label", attr(node, "id"));
      if (label.empty()) throw ParseError("place without id or label");
      std::size_t index = net().places.size();
      net().places.push_back(label);
      std::string marking = trim(attr(node, "initialMarking", "0"));
      net().initial.push_back(marking.empty() ? LinExpr{} : expression(marking, "place " + label));
      place_ref.emplace(label, index);
      if (has_attr(node, "id")) place_ref.emplace(attr(node, "id"), index);
    }
  }

  void transitions(const pt::ptree& root) {
    for (const auto& [tag, node] : root) {
      if (tag != "transition") continue;
      Transition t;
      t.name = attr(node, "label", attr(node, "id"));
      if (t.name.empty()) throw ParseError("transition without id or label");
      std::string where = "transition " + t.name;
      std::string lo = trim(attr(node, "eft_param", attr(node, "eft", "0")));
      std::string hi = trim(attr(node, "lft_param", attr(node, "lft", "inf")));
      t.interval.lo = lo.empty() ? LinExpr{} : expression(lo, where);
      if (hi.empty() || hi == "inf" || hi == "infinity" || hi == "-1")
        t.interval.hi = TimeBound::infinity();
      else
        t.interval.hi = TimeBound::finite(expression(hi, where));
      std::size_t index = net().transitions.size();
      transition_ref.emplace(t.name, index);
      if (has_attr(node, "id")) transition_ref.emplace(attr(node, "id"), index);
      net().transitions.push_back(std::move(t));
    }
  }

  void arc(const pt::ptree& node) {
    std::string type = attr(node, "type", "normal");
    std::int64_t weight = 1;
    try {
      weight = std::stoll(attr(node, "weight", "1"));
    } catch (const std::exception&) {
      throw ParseError("arc weight '" + attr(node, "weight") + "' is not an integer");
    }
    if (weight <= 0) throw ParseError("arc weight must be positive");

    std::size_t p = 0, t = 0;
    bool into_transition = true;
    if (has_attr(node, "place") && has_attr(node, "transition")) {
      p = resolve(place_ref, attr(node, "place"), "place");
      t = resolve(transition_ref, attr(node, "transition"), "transition");
      if (type == "TransitionPlace") into_transition = false;
      else if (type != "PlaceTransition" && type != "logicalInhibitor" && type != "inhibitor" && type != "normal")
        throw ParseError("unknown arc type '" + type + "'");
      if (type == "normal") {
        std::string dir = attr(node, "direction", "in");
        into_transition = dir != "out";
      }
    } else {
      std::string source = attr(node, "source"), target = attr(node, "target");
      if (source.empty() || target.empty()) throw ParseError("arc needs place/transition or source/target");
      if (type != "normal" && type != "inhibitor" && type != "PlaceTransition" && type != "TransitionPlace" &&
          type != "logicalInhibitor")
        throw ParseError("unknown arc type '" + type + "'");
      if (place_ref.count(source) && transition_ref.count(target)) {
        p = place_ref.at(source);
        t = transition_ref.at(target);
      } else if (transition_ref.count(source) && place_ref.count(target)) {
        p = place_ref.at(target);
        t = transition_ref.at(source);
        into_transition = false;
      } else {
        throw ParseError("arc " + source + " -> " + target + " does not join a place and a transition");
      }
    }
    Transition& tr = net().transitions[t];
    if (type == "inhibitor" || type == "logicalInhibitor") {
      if (!into_transition) throw ParseError("inhibitor arc must run from a place to a transition");
      tr.inhibit.push_back(Arc{p, weight});
    } else if (into_transition) {
      tr.pre.push_back(Arc{p, weight});
    } else {
      tr.post.push_back(Arc{p, weight});
    }
  }

  void run(const pt::ptree& root) {
    parameters(root);
    places(root);
    transitions(root);
    std::vector<Formula> constraints;
    static const std::set<std::string> known{"parameter", "place", "transition", "arc", "constraint", "<xmlattr>",
                                             "<xmlcomment>"};
    for (const auto& [tag, node] : root) {
      if (tag == "arc") {
        arc(node);
      } else if (tag == "constraint") {
        std::string text = trim(node.get_value<std::string>());
        try {
          constraints.push_back(parse_formula(text, parameter_symbols(net())));
        } catch (const ParseError& e) {
          throw ParseError("constraint '" + text + "': " + e.what());
        }
      } else if (!known.count(tag)) {
        out.diagnostics.push_back("skipped unknown element <" + tag + ">");
      }
    }
    net().constraint = Formula::conj(std::move(constraints));
  }
};

}  // namespace

RomeoImport parse_romeo(const std::string& xml) {
  pt::ptree doc;
  std::istringstream in(xml);
  try {
    pt::read_xml(in, doc, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("malformed XML: ") + e.what());
  }
  const pt::ptree* root = nullptr;
  std::string root_tag;
  for (const auto& [tag, node] : doc) {
    if (tag == "<xmlcomment>") continue;
    root = &node;
    root_tag = tag;
    break;
  }
  if (!root) throw ParseError("empty XML document");
  Importer imp;
  if (root_tag != "TPN" && root_tag != "romeo" && root_tag != "net")
    imp.out.diagnostics.push_back("unexpected root element <" + root_tag + ">, reading it as a net");
  imp.net().name = attr(*root, "name", "romeo");
  imp.run(*root);
  auto issues = validate(imp.net());
  if (!issues.empty()) {
    std::string msg = "imported net is not well-formed:";
    for (const auto& i : issues) msg += "\n  " + i;
    throw ParseError(msg);
  }
  return std::move(imp.out);
}

RomeoImport load_romeo(const std::string& path) { return parse_romeo(read_file(path)); }

}  // namespace pitpn::io
