#pragma once

#include <string>

namespace gs::io {

/// Writes `content` to a sibling temporary file and renames it over `path`.
/// Throws std::runtime_error on failure.
void write_file_atomic(const std::string& path, const std::string& content);

/// printf-style "%.16e".
std::string format_real(double v);

}  // namespace gs::io
