#include "jpr/serialize/archive.hpp"

#include <zlib.h>

#include <cstring>

#include "jpr/error.hpp"
#include "jpr/png_io.hpp"

namespace jpr::serialize {

using nlohmann::json;

namespace {

const char* dtype_name(torch::ScalarType t) {
  switch (t) {
    case torch::kFloat32: return "f32";
    case torch::kFloat64: return "f64";
    case torch::kUInt8: return "u8";
    case torch::kInt64: return "i64";
    default: break;
  }
  throw PreconditionError("archive: unsupported tensor dtype");
}

torch::ScalarType parse_dtype(const std::string& s) {
  if (s == "f32") return torch::kFloat32;
  if (s == "f64") return torch::kFloat64;
  if (s == "u8") return torch::kUInt8;
  if (s == "i64") return torch::kInt64;
  throw ParseError("archive: unknown dtype '" + s + "'");
}

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(bytes[offset + i]) << (8 * i);
  return v;
}

std::uint32_t crc(std::span<const std::uint8_t> bytes) {
  uLong c = crc32(0L, Z_NULL, 0);
  std::size_t done = 0;
  while (done < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - done, 1u << 30));
    c = crc32(c, bytes.data() + done, chunk);
    done += chunk;
  }
  return static_cast<std::uint32_t>(c);
}

}  // namespace

void Archive::add(std::string name, const torch::Tensor& t) {
  if (has(name)) throw PreconditionError("archive already holds a tensor named '" + name + "'");
  tensors.emplace_back(std::move(name), t.detach().cpu().contiguous().clone());
}

bool Archive::has(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return true;
  return false;
}

const torch::Tensor& Archive::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw ParseError("archive has no tensor named '" + name + "'");
}

std::vector<std::uint8_t> encode_archive(const Archive& archive) {
  json table = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : archive.tensors) {
    const std::uint64_t nbytes = static_cast<std::uint64_t>(t.numel()) * t.element_size();
    table.push_back({{"name", name}, {"dtype", dtype_name(t.scalar_type())}, {"shape", t.sizes().vec()},
                     {"offset", offset}, {"nbytes", nbytes}});
    offset += nbytes;
  }
  const std::string header = json{{"meta", archive.meta}, {"tensors", table}}.dump();

  std::vector<std::uint8_t> out;
  out.reserve(8 + 4 + 8 + header.size() + offset + 4);
  out.insert(out.end(), kArchiveMagic, kArchiveMagic + 8);
  put_le<std::uint32_t>(out, kArchiveVersion);
  put_le<std::uint64_t>(out, header.size());
  out.insert(out.end(), header.begin(), header.end());
  for (const auto& [name, t] : archive.tensors) {
    const auto* p = static_cast<const std::uint8_t*>(t.data_ptr());
    out.insert(out.end(), p, p + t.numel() * t.element_size());
  }
  put_le<std::uint32_t>(out, crc(out));
  return out;
}

Archive decode_archive(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kFixed = 8 + 4 + 8;
  if (bytes.size() < kFixed + 4 || std::memcmp(bytes.data(), kArchiveMagic, 8) != 0)
    throw ParseError("not a tensor archive (bad magic)");
  const auto version = get_le<std::uint32_t>(bytes, 8);
  if (version != kArchiveVersion)
    throw ParseError("unsupported archive version " + std::to_string(version));
  const auto stored_crc = get_le<std::uint32_t>(bytes, bytes.size() - 4);
  if (crc(bytes.first(bytes.size() - 4)) != stored_crc) throw ParseError("archive checksum mismatch");

  const auto header_len = get_le<std::uint64_t>(bytes, 12);
  if (header_len > bytes.size() - kFixed - 4) throw ParseError("archive header overruns file");
  const std::size_t payload_start = kFixed + header_len;
  const std::size_t payload_len = bytes.size() - 4 - payload_start;

  Archive archive;
  try {
    const json header = json::parse(bytes.begin() + kFixed, bytes.begin() + static_cast<std::ptrdiff_t>(payload_start));
    archive.meta = header.at("meta");
    for (const auto& entry : header.at("tensors")) {
      const auto dtype = parse_dtype(entry.at("dtype").get<std::string>());
      const auto shape = entry.at("shape").get<std::vector<std::int64_t>>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      const auto nbytes = entry.at("nbytes").get<std::uint64_t>();
      auto t = torch::empty(shape, torch::TensorOptions().dtype(dtype));
      if (nbytes != static_cast<std::uint64_t>(t.numel()) * t.element_size() || offset > payload_len ||
          nbytes > payload_len - offset)
        throw ParseError("archive entry '" + entry.at("name").get<std::string>() + "' is inconsistent");
      std::memcpy(t.data_ptr(), bytes.data() + payload_start + offset, nbytes);
      archive.tensors.emplace_back(entry.at("name").get<std::string>(), std::move(t));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("archive header: ") + e.what());
  } catch (const c10::Error& e) {
    throw ParseError(std::string("archive tensor: ") + e.what_without_backtrace());
  }
  return archive;
}

void write_archive(const std::filesystem::path& path, const Archive& archive) {
  write_file_atomic(path, encode_archive(archive));
}

Archive read_archive(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_archive(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace jpr::serialize
