#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace racegp {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Lines without their terminators; a trailing empty line is dropped.
std::vector<std::string_view> split_lines(std::string_view text);
std::vector<std::string_view> split_csv_line(std::string_view line);
std::string_view trim(std::string_view s);
/// Everything before the first '#'.
std::string_view strip_comment(std::string_view line);

/// Strict: the whole field must be a finite or "nan" number. Throws Error.
double parse_double(std::string_view field);
/// Shortest text that round-trips to the same double.
std::string format_double(double value);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(std::span<const double> values, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

}  // namespace racegp
