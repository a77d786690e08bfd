#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qcarnot/core.hpp"

namespace qcarnot {

/// Named cycle configurations. Every preset is set to a cycle time of 250
/// reporting units; `carnot-shortcut` and `eq6-consistent` are the same
/// geometry.
CycleSpec preset(std::string_view name);
std::vector<std::string> preset_names();

/// True when `strict_carnot` validation applies to the preset (its corners
/// are meant to satisfy the Carnot corner conditions).
bool preset_is_strict(std::string_view name);

inline constexpr double kPresetCycleTime = 250.0;

}  // namespace qcarnot
