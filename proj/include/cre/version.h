#ifndef CRE_VERSION_H_
#define CRE_VERSION_H_

#include <string_view>

namespace cre {

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace cre

#endif  // CRE_VERSION_H_
