#ifndef LOGDIFF_VERSION_HPP
#define LOGDIFF_VERSION_HPP

namespace logdiff {

inline constexpr const char* version_string = "0.1.0";

} // namespace logdiff

#endif
