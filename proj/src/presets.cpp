#include "qcarnot/presets.hpp"

#include "qcarnot/cycle.hpp"

namespace qcarnot {

namespace {

CycleSpec carnot_base() {
  CycleSpec s;
  s.kind = CycleKind::CarnotShortcut;
  s.omega1 = 10.0;
  s.omega2 = 8.0;
  s.omega3 = 5.0;
  s.omega4 = 6.25;
  s.t_hot_bath = 8.0;
  s.t_cold_bath = 5.0;
  s.t_hot_internal = 8.0;
  s.t_cold_internal = 5.0;
  s.coupling = 0.05;
  s.adiabat_duration = 5.0;
  return s;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"carnot-shortcut", "eq6-consistent", "table1-literal", "endo-shortcut",
          "endo-global"};
}

bool preset_is_strict(std::string_view name) {
  return name == "carnot-shortcut" || name == "eq6-consistent";
}

CycleSpec preset(std::string_view name) {
  CycleSpec s = carnot_base();
  if (name == "carnot-shortcut" || name == "eq6-consistent") {
    // nothing to change
  } else if (name == "table1-literal") {
    s.omega2 = 6.25;
    s.omega4 = 7.5;
  } else if (name == "endo-shortcut") {
    // Same corners; the working medium keeps 8 and 5 while the baths sit
    // at 7.75 and 5.25.
    s.kind = CycleKind::EndoShortcut;
    s.t_hot_bath = 7.75;
    s.t_cold_bath = 5.25;
  } else if (name == "endo-global") {
    // Carnot corners rescaled to internal temperatures 7.75 and 5.25:
    // (9.6875, 7.75, 5.25, 6.5625).
    s.kind = CycleKind::EndoGlobal;
    const auto g = endo_global_corner_frequencies(geometry_of(s), 5.25, 7.75,
                                                  s.t_cold_bath, s.t_hot_bath);
    s.omega1 = g.omega1;
    s.omega2 = g.omega2;
    s.omega3 = g.omega3;
    s.omega4 = g.omega4;
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  return s.with_cycle_time(to_atomic_time(kPresetCycleTime));
}

}  // namespace qcarnot
