#include "jpr/dataset/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "jpr/log.hpp"
#include "jpr/png_io.hpp"

namespace jpr::dataset {

namespace fs = std::filesystem;
using nlohmann::json;

double BuildReport::data_reduction() const {
  if (total_png_bytes == 0) return 0.0;
  return 1.0 - static_cast<double>(total_jpeg_bytes) / static_cast<double>(total_png_bytes);
}

PairedSample make_pair(std::string source_id, const ImageU8& original, std::size_t png_bytes,
                       int quality) {
  auto stream = codec::compress(original, quality);
  PairedSample s;
  s.source_id = std::move(source_id);
  s.original = original;
  s.compressed = codec::decompress(stream);
  s.png_bytes = png_bytes;
  s.jpeg_bytes = stream.encoded_size;
  s.jpeg_stream = std::move(stream.bytes);
  return s;
}

std::vector<PairedSample> build_pairs(const fs::path& png_dir, int quality, BuildReport* report) {
  if (!fs::is_directory(png_dir)) throw IoError("not a directory: " + png_dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(png_dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  BuildReport local;
  std::vector<PairedSample> pairs;
  for (const auto& path : files) {
    const auto bytes = read_file(path);
    ImageU8 img;
    try {
      img = decode_png(bytes);
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    if (img.height != kSourceSize || img.width != kSourceSize) {
      log_warning("skipping " + path.string() + ": " + std::to_string(img.height) + "x" +
                  std::to_string(img.width) + " is not 128x128");
      ++local.skipped;
      continue;
    }
    pairs.push_back(make_pair(path.stem().string(), img, bytes.size(), quality));
    ++local.accepted;
    local.total_png_bytes += pairs.back().png_bytes;
    local.total_jpeg_bytes += pairs.back().jpeg_bytes;
  }
  if (report) *report = local;
  return pairs;
}

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  // Rejection sampling keeps the draw independent of the standard library's
  // distribution implementation.
  auto uniform_below = [&rng](std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do r = rng(); while (r >= limit);
    return r % bound;
  };
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[uniform_below(i)]);
  return idx;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
  return permutation(n, seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(epoch));
}

DatasetSplit split(std::vector<PairedSample> pairs, double ratio, std::uint64_t seed) {
  if (ratio < 0.0 || ratio > 1.0) throw PreconditionError("split ratio must be in [0,1]");
  const auto order = permutation(pairs.size(), seed);
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(pairs.size())));
  DatasetSplit out;
  out.seed = seed;
  for (std::size_t k = 0; k < order.size(); ++k)
    (k < n_train ? out.train : out.test).push_back(std::move(pairs[order[k]]));
  return out;
}

ImageF resize_bilinear(const ImageF& img, int out_height, int out_width) {
  if (out_height < 1 || out_width < 1 || img.height < 1 || img.width < 1)
    throw ShapeError("resize_bilinear: empty image");
  ImageF out(out_height, out_width, img.channels, img.colorspace, img.range);
  const double sy = static_cast<double>(img.height) / out_height;
  const double sx = static_cast<double>(img.width) / out_width;
  struct Tap {
    int i0, i1;
    double w1;
  };
  auto taps = [](int n_out, int n_in, double scale) {
    std::vector<Tap> t(static_cast<std::size_t>(n_out));
    for (int o = 0; o < n_out; ++o) {
      const double src = std::max(0.0, (o + 0.5) * scale - 0.5);
      const int i0 = std::min(static_cast<int>(src), n_in - 1);
      const int i1 = std::min(i0 + 1, n_in - 1);
      t[o] = {i0, i1, src - i0};
    }
    return t;
  };
  const auto ty = taps(out_height, img.height, sy);
  const auto tx = taps(out_width, img.width, sx);
  for (int y = 0; y < out_height; ++y) {
    const auto& a = ty[y];
    for (int x = 0; x < out_width; ++x) {
      const auto& b = tx[x];
      for (int c = 0; c < img.channels; ++c) {
        const double top = (1.0 - b.w1) * img.at(a.i0, b.i0, c) + b.w1 * img.at(a.i0, b.i1, c);
        const double bot = (1.0 - b.w1) * img.at(a.i1, b.i0, c) + b.w1 * img.at(a.i1, b.i1, c);
        out.at(y, x, c) = static_cast<float>((1.0 - a.w1) * top + a.w1 * bot);
      }
    }
  }
  return out;
}

ImageF upsample_bilinear(const ImageF& img) {
  if (img.height != kSourceSize || img.width != kSourceSize)
    throw ShapeError("upsample_bilinear expects a 128x128 image");
  return resize_bilinear(img, kModelSize, kModelSize);
}

ImageF downsample_to_original(const ImageF& img) {
  if (img.height != kModelSize || img.width != kModelSize)
    throw ShapeError("downsample_to_original expects a 512x512 image");
  return resize_bilinear(img, kSourceSize, kSourceSize);
}

ImageF to_model_range(const ImageF& img) {
  if (img.range != ValueRange::Byte) throw PreconditionError("to_model_range expects a [0,255] image");
  ImageF out = img;
  out.range = ValueRange::Signed;
  for (auto& v : out.data) v = v / 127.5f - 1.0f;
  return out;
}

ImageF to_model_range(const ImageU8& img) { return to_model_range(to_float(img)); }

ImageF from_model_range(const ImageF& img) {
  if (img.range != ValueRange::Signed) throw PreconditionError("from_model_range expects a [-1,1] image");
  ImageF out = img;
  out.range = ValueRange::Byte;
  for (auto& v : out.data) v = std::clamp((v + 1.0f) * 127.5f, 0.0f, 255.0f);
  return out;
}

std::string format_manifest(const std::vector<ManifestRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    // Keys are emitted in a fixed order so manifests compare byte for byte.
    json j = json::object();
    j["source_id"] = r.source_id;
    j["split"] = r.split;
    j["original"] = r.original_path;
    j["compressed"] = r.compressed_path;
    j["jpeg"] = r.jpeg_path;
    j["png_bytes"] = r.png_bytes;
    j["jpeg_bytes"] = r.jpeg_bytes;
    j["quality"] = r.quality;
    j["seed"] = r.seed;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<ManifestRecord> parse_manifest(const std::string& text) {
  std::vector<ManifestRecord> records;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      ManifestRecord r;
      r.source_id = j.at("source_id").get<std::string>();
      r.split = j.at("split").get<std::string>();
      r.original_path = j.at("original").get<std::string>();
      r.compressed_path = j.at("compressed").get<std::string>();
      r.jpeg_path = j.at("jpeg").get<std::string>();
      r.png_bytes = j.at("png_bytes").get<std::size_t>();
      r.jpeg_bytes = j.at("jpeg_bytes").get<std::size_t>();
      r.quality = j.at("quality").get<int>();
      r.seed = j.at("seed").get<std::uint64_t>();
      if (r.split != "train" && r.split != "test") throw ParseError("unknown split '" + r.split + "'");
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError("manifest line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

void write_dataset(const DatasetSplit& split, const fs::path& out_dir, int quality) {
  for (const char* sub : {"original", "compressed", "jpeg"}) fs::create_directories(out_dir / sub);
  std::vector<ManifestRecord> records;
  auto emit = [&](const PairedSample& s, const char* which) {
    ManifestRecord r{s.source_id,
                     which,
                     "original/" + s.source_id + ".png",
                     "compressed/" + s.source_id + ".png",
                     "jpeg/" + s.source_id + ".jpg",
                     s.png_bytes,
                     s.jpeg_bytes,
                     quality,
                     split.seed};
    write_png(out_dir / r.original_path, s.original);
    write_png(out_dir / r.compressed_path, s.compressed);
    if (!s.jpeg_stream.empty()) write_file_atomic(out_dir / r.jpeg_path, s.jpeg_stream);
    records.push_back(std::move(r));
  };
  for (const auto& s : split.train) emit(s, "train");
  for (const auto& s : split.test) emit(s, "test");
  const auto text = format_manifest(records);
  write_file_atomic(out_dir / kManifestName,
                    std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

DatasetSplit load_dataset(const fs::path& dir) {
  const auto raw = read_file(dir / kManifestName);
  const auto records = parse_manifest(std::string(raw.begin(), raw.end()));
  DatasetSplit out;
  for (const auto& r : records) {
    PairedSample s;
    s.source_id = r.source_id;
    s.original = read_png(dir / r.original_path);
    s.compressed = read_png(dir / r.compressed_path);
    if (!s.original.same_shape(s.compressed))
      throw ShapeError("pair " + r.source_id + ": original and compressed sizes differ");
    s.png_bytes = r.png_bytes;
    s.jpeg_bytes = r.jpeg_bytes;
    out.seed = r.seed;
    (r.split == "train" ? out.train : out.test).push_back(std::move(s));
  }
  return out;
}

}  // namespace jpr::dataset
