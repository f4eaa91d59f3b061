#pragma once

// Importer for Romeo-style time Petri net XML.
//
// Accepted subset:
//   <TPN name="...">                         (root; <romeo> or <net> also accepted)
//     <parameter name="a" type="real|int"/>
//     <constraint>a >= 0</constraint>        (infix, may repeat)
//     <place id="0" label="p1" initialMarking="1"/>
//     <transition id="0" label="t1" eft="2" lft="inf"/>
//        eft/lft are numbers or linear parameter expressions; eft_param and
//        lft_param override them; lft may be "inf", "infinity" or empty.
//     <arc place="0" transition="0" type="PlaceTransition|TransitionPlace|
//          logicalInhibitor|inhibitor" weight="1"/>
//     <arc source="p1" target="t1" type="normal|inhibitor" weight="1"/>
// Places and transitions are referenced by id or by label. Unknown elements
// and attributes such as <graphics> are reported and skipped.

#include "pitpn/native_format.hpp"

#include <string>
#include <vector>

namespace pitpn::io {

struct RomeoImport {
  Net net;
  /// Non-fatal findings (skipped elements, defaulted values).
  std::vector<std::string> diagnostics;
};

/// Throws ParseError on malformed XML, unknown arc types, dangling
/// references or unparseable time bounds.
RomeoImport parse_romeo(const std::string& xml);
RomeoImport load_romeo(const std::string& path);

}  // namespace pitpn::io
