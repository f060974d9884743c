#pragma once

#include <string>
#include <string_view>

namespace jh {

/// Lowercase hex SHA-256 digest (64 chars) of the given bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace jh
