#ifndef METACSV_VERSION_HPP
#define METACSV_VERSION_HPP

namespace metacsv {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace metacsv

#endif
