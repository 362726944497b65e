#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scenesynth {

// Everything before the first '#'.
std::string_view strip_comment(std::string_view line);

std::vector<std::string> split_ws(std::string_view line);
std::vector<std::string> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

// Whole-token parse; nullopt on trailing garbage or a non-finite value.
std::optional<double> parse_double(std::string_view token);
std::optional<long long> parse_int(std::string_view token);
std::optional<unsigned long long> parse_uint(std::string_view token);

// Writes to `path.tmp` and renames over `path`.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace scenesynth
