#pragma once

#define SLIDENOISE_VERSION "1.0.0"

namespace slidenoise {

inline constexpr const char* version = SLIDENOISE_VERSION;

}  // namespace slidenoise
