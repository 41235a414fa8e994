#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mtbench::io {

// One entry per LF-terminated line; a trailing line without LF is kept.
// Bytes are preserved (no CR stripping, no normalization).
std::vector<std::string> read_lines(const std::filesystem::path& path);
std::vector<std::string> split_lines(std::string_view content);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);

std::vector<std::string> split(std::string_view text, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Fixed "%.2f" style used for every reported BLEU value.
std::string format_score(double value);

}  // namespace mtbench::io
