#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace topictrace::io {

std::string read_text_file(const std::string& path);

// Writes to "<path>.tmp" in the same directory and renames over the target,
// so a failed run never leaves a partial output behind.
void write_text_file_atomic(const std::string& path, std::string_view content);

bool file_exists(const std::string& path);

// FNV-1a 64-bit, rendered as 16 hex digits. Used for manifest content hashes.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

// Shortest round-trip decimal rendering, always '.' as separator.
std::string format_double(double x);

// Minimal CSV: fields must not contain commas or newlines (all our schemas
// are dates, numbers and bare names).
std::vector<std::string> split_csv_line(std::string_view line);
std::vector<std::string> split_lines(std::string_view content);

} // namespace topictrace::io
