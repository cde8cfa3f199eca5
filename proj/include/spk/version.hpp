#pragma once

namespace spk {

inline constexpr const char* kToolkitVersion = "1.0.0";

}  // namespace spk
