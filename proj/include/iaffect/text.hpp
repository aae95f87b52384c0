#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace iaffect::text {

void append_shortest(std::string& out, double value);
void append_fixed(std::string& out, double value, int decimals);
/// 17 significant digits, the rendering used by every CSV output.
void append_g17(std::string& out, double value);
std::string g17(double value);

/// Splits on `sep` without allocating the pieces.
std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

/// Strict full-field parse; returns false on trailing junk or empty input.
bool parse_double(std::string_view field, double& out);

std::string read_file(const std::filesystem::path& path);

/// Writes to `path.tmp` then renames over `path`, so readers never observe
/// a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace iaffect::text
