#pragma once

#include <string_view>

namespace otfpf {

inline constexpr std::string_view kArtifactName = "otfpf";
inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace otfpf
