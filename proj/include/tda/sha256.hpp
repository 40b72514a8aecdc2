#pragma once

#include <string>
#include <string_view>

namespace tda {

// SHA-256 of a byte string, returned as lowercase hex.
std::string sha256_hex(std::string_view data);

// SHA-256 of a file's contents.
std::string sha256_file(const std::string& path);

}  // namespace tda
