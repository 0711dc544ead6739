#pragma once

#include <string_view>

namespace spinsurf {

inline constexpr std::string_view project_name = "spinsurf";
inline constexpr std::string_view version = "0.1.0";

}  // namespace spinsurf
