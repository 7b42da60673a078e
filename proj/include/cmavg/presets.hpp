#ifndef CMAVG_PRESETS_HPP
#define CMAVG_PRESETS_HPP

// One representative curve per class-number-1 discriminant, named by the
// discriminant. The same table ships as data/presets.json (the versioned
// catalog file); a test keeps the two in sync. Models are short Weierstrass
// forms of standard small-conductor curves; see the catalog file for the
// per-curve provenance notes.

#include <stdexcept>
#include <vector>

#include "cmavg/curve.hpp"

namespace cmavg {

inline constexpr int kPresetCatalogVersion = 1;

inline const std::vector<CurveSpec>& preset_catalog() {
  static const std::vector<CurveSpec> v = [] {
    std::vector<CurveSpec> c{
        {"cm-3", 0, 1, 36, -3},
        {"cm-4", -1, 0, 32, -4},
        {"cm-7", -35, -98, 49, -7},
        {"cm-8", -270, 1512, 256, -8},
        {"cm-11", -9504, 365904, 121, -11},
        {"cm-19", -608, 5776, 361, -19},
        {"cm-43", -13760, 621264, 1849, -43},
        {"cm-67", -117920, 15585808, 4489, -67},
        {"cm-163", -34790720, 78984748304, 26569, -163},
    };
    for (const auto& s : c) s.validate();
    return c;
  }();
  return v;
}

inline const CurveSpec& preset_curve(const std::string& label) {
  for (const auto& c : preset_catalog())
    if (c.label == label) return c;
  throw std::invalid_argument("unknown preset '" + label + "' (try: cm-3 cm-4 cm-7 cm-8 cm-11 cm-19 cm-43 cm-67 cm-163)");
}

}  // namespace cmavg

#endif  // CMAVG_PRESETS_HPP
