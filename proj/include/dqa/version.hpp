#pragma once

namespace dqa {

inline constexpr const char* kToolkitVersion = "0.1.0";

}  // namespace dqa
