#pragma once

namespace sqmem {

inline constexpr const char* kLibraryVersion = "0.1.0";

}  // namespace sqmem
