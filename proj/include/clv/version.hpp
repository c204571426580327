#pragma once

namespace clv {

inline constexpr const char* kVersion = "0.1.0";

}
