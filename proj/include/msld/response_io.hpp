#pragma once

#include "msld/types.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>

namespace msld {

/// "MSLDF <width> <height>\n" followed by width * height little-endian IEEE-754
/// binary32 values in row-major order.
void write_response(std::ostream& out, const ResponseMap& response);
ResponseMap read_response(std::istream& in);

void save_response(const ResponseMap& response, const std::filesystem::path& path);
ResponseMap load_response(const std::filesystem::path& path);

/// Writes through a temporary sibling file and renames it into place, so a
/// failure never leaves a partial file at `path`.
void write_file_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);

}  // namespace msld
