#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

namespace jpr::serialize {

// Binary layout (little-endian):
//   "JPRARCH1" | u32 version | u64 header length | header JSON | payload | u32 CRC-32
// The header holds free-form metadata plus a tensor table with name, dtype,
// shape, offset and byte length into the payload. The CRC covers everything
// before it.
inline constexpr char kArchiveMagic[8] = {'J', 'P', 'R', 'A', 'R', 'C', 'H', '1'};
inline constexpr std::uint32_t kArchiveVersion = 1;

struct Archive {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<std::pair<std::string, torch::Tensor>> tensors;

  void add(std::string name, const torch::Tensor& t);
  bool has(const std::string& name) const;
  // Throws ParseError when the entry is missing.
  const torch::Tensor& tensor(const std::string& name) const;
};

std::vector<std::uint8_t> encode_archive(const Archive& archive);
// Validates magic, version, checksum and every table entry before returning.
Archive decode_archive(std::span<const std::uint8_t> bytes);

void write_archive(const std::filesystem::path& path, const Archive& archive);
Archive read_archive(const std::filesystem::path& path);

}  // namespace jpr::serialize
