#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace civitopic::io {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
void ensure_directory(const std::filesystem::path& dir);

std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Raw little-endian float32 block.
void write_f32_le(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_f32_le(const std::filesystem::path& path);

}  // namespace civitopic::io
