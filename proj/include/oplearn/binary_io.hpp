#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace oplearn {

/// FNV-1a 64 over raw bytes, rendered as 16 hex digits.
std::string fnv1a_hex(std::span<const std::byte> bytes);
std::string fnv1a_hex(std::span<const double> values);
std::string fnv1a_hex(const std::string& text);

/// Raw little-endian float64 blob.
void write_f64_blob(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_f64_blob(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace oplearn
