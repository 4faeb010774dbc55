#pragma once

#include <string>
#include <string_view>

namespace pathlight {

// Throws std::runtime_error naming the path on failure.
std::string read_file(const std::string& path);

// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace pathlight
