#pragma once

namespace bvmi {

inline constexpr const char* kVersion = "0.1.0";

} // namespace bvmi
