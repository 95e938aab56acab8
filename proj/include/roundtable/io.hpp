#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace roundtable::io {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view data);

}  // namespace roundtable::io
