#pragma once

namespace eitsim {

inline constexpr const char* version = "0.1.0";

}
