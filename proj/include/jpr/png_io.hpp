#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "jpr/image.hpp"

namespace jpr {

// Decodes an 8-bit PNG into RGB. Grey, palette and alpha inputs are expanded
// or stripped so the result always has three channels.
ImageU8 decode_png(std::span<const std::uint8_t> bytes);
ImageU8 read_png(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const ImageU8& img);
void write_png(const std::filesystem::path& path, const ImageU8& img);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace jpr
