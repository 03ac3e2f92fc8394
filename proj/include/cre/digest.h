#ifndef CRE_DIGEST_H_
#define CRE_DIGEST_H_

#include <string>
#include <string_view>

namespace cre {

// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

}  // namespace cre

#endif  // CRE_DIGEST_H_
