#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Small helpers shared by every file format in the project.
namespace tcm::io {

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// Strict decimal parse; throws FormatError naming `context` on failure.
double parse_double(std::string_view s, std::string_view context);
long long parse_int(std::string_view s, std::string_view context);

std::vector<std::string> split_csv_line(std::string_view line);
std::string_view trim(std::string_view s);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

/// Little-endian float32 blobs, independent of host byte order.
void write_f32_le(const std::filesystem::path& path, std::span<const float> values);
std::vector<float> read_f32_le(const std::filesystem::path& path);

/// Sidecar metadata lives next to the payload as `<payload>.json`.
std::filesystem::path sidecar_path(const std::filesystem::path& payload);

}  // namespace tcm::io
