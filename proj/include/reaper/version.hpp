#pragma once

#include <array>
#include <string_view>

namespace reaper {

inline constexpr std::string_view kVersion = "1.0.0";

struct ModuleVersion {
  std::string_view name;
  std::string_view version;
};

/// Bumped whenever a module changes its numerical output.
inline constexpr std::array<ModuleVersion, 6> kModuleVersions{{
    {"closed_forms", "1.0.0"},
    {"solver", "1.1.0"},
    {"diagnostics", "1.0.0"},
    {"scenarios", "1.0.0"},
    {"verification", "1.0.0"},
    {"cli", "1.0.0"},
}};

}  // namespace reaper
