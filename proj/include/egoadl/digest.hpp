#pragma once

#include <string>
#include <string_view>

namespace egoadl {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// SHA-256 of a file's bytes; throws std::runtime_error if unreadable.
std::string sha256_file(const std::string& path);

}  // namespace egoadl
