#pragma once

#include <filesystem>
#include <string>

namespace pcd {

std::string read_file(const std::filesystem::path& path);

/// Writes `contents` to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace pcd
