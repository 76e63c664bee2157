#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "jpr/dataset/dataset.hpp"
#include "jpr/dataset/synthetic.hpp"
#include "jpr/error.hpp"
#include "jpr/metrics/metrics.hpp"
#include "jpr/png_io.hpp"
#include "support.hpp"

using namespace jpr;
using namespace jpr::dataset;

namespace {

std::vector<PairedSample> synthetic_pairs(std::size_t n, std::uint64_t seed, int quality = codec::kMaxCompressionQuality) {
  std::vector<PairedSample> out;
  const auto images = synthesize_corpus(n, seed);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(make_pair("s" + std::to_string(i), images[i], encode_png(images[i]).size(), quality));
  return out;
}

std::set<std::string> ids_of(const std::vector<PairedSample>& v) {
  std::set<std::string> s;
  for (const auto& p : v) s.insert(p.source_id);
  return s;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("build_pairs compresses every 128x128 png") {
  testing::TempDir dir("pairs");
  write_synthetic_corpus(dir.path(), 10, 3);
  write_png(dir / "wrong_size.png", testing::random_image(64, 64, 1));
  BuildReport report;
  const auto pairs = build_pairs(dir.path(), codec::kMaxCompressionQuality, &report);
  CHECK(pairs.size() == 10u);
  CHECK(report.accepted == 10u);
  CHECK(report.skipped == 1u);
  for (const auto& p : pairs) {
    CHECK(p.original.same_shape(p.compressed));
    CHECK(p.jpeg_bytes > 0u);
    CHECK(p.jpeg_bytes < p.png_bytes);
    CHECK(p.jpeg_stream.size() == p.jpeg_bytes);
  }
  CHECK(std::is_sorted(pairs.begin(), pairs.end(),
                       [](const auto& a, const auto& b) { return a.source_id < b.source_id; }));
  const double r = report.data_reduction();
  CHECK(r >= 0.95);
  CHECK(r <= 0.985);
}

TEST_CASE("build_pairs names unreadable files") {
  testing::TempDir dir("broken");
  write_synthetic_corpus(dir.path(), 2, 1);
  const std::string junk = "not a png";
  write_file_atomic(dir / "junk.png", std::span(reinterpret_cast<const std::uint8_t*>(junk.data()), junk.size()));
  try {
    build_pairs(dir.path());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("junk.png") != std::string::npos);
  }
}

TEST_CASE("high quality pairs are near lossless") {
  for (const auto& p : synthetic_pairs(3, 9, 100)) CHECK(metrics::psnr(p.original, p.compressed) > 40.0);
}

TEST_CASE("split sizes, determinism and disjointness") {
  auto pairs = synthetic_pairs(10, 4);
  const auto a = split(pairs, 0.8, 7);
  CHECK(a.train.size() == 8u);
  CHECK(a.test.size() == 2u);
  const auto b = split(pairs, 0.8, 7);
  CHECK(ids_of(a.train) == ids_of(b.train));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = split(pairs, 0.8, seed);
    const auto tr = ids_of(s.train), te = ids_of(s.test);
    for (const auto& id : te) REQUIRE(tr.count(id) == 0);
    REQUIRE(tr.size() + te.size() == 10u);
  }
  CHECK_THROWS_AS(split(pairs, 1.5, 0), PreconditionError);
}

TEST_CASE("split of the full corpus size") {
  std::vector<PairedSample> many(4000);
  for (std::size_t i = 0; i < many.size(); ++i) many[i].source_id = std::to_string(i);
  const auto s = split(std::move(many), 0.8, 1);
  CHECK(s.train.size() == 3200u);
  CHECK(s.test.size() == 800u);
}

TEST_CASE("permutations are seeded bijections") {
  const auto p = permutation(100, 5);
  auto sorted = p;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 100; ++i) CHECK(sorted[i] == i);
  CHECK(permutation(100, 5) == p);
  CHECK(permutation(100, 6) != p);
  CHECK(epoch_order(50, 1, 1) != epoch_order(50, 1, 2));
  CHECK(epoch_order(50, 1, 2) == epoch_order(50, 1, 2));
}

TEST_CASE("bilinear resizing") {
  ImageF flat(128, 128, 3, ColorSpace::RGB, ValueRange::Byte, 77.0f);
  const auto up = upsample_bilinear(flat);
  CHECK(up.height == 512);
  CHECK(up.width == 512);
  CHECK(std::all_of(up.data.begin(), up.data.end(), [](float v) { return v == 77.0f; }));
  const auto down = downsample_to_original(up);
  CHECK(down.height == 128);
  CHECK(std::all_of(down.data.begin(), down.data.end(), [](float v) { return v == 77.0f; }));

  // A linear ramp survives upsampling away from the replicated border:
  // output column X samples input position (X + 0.5) / 4 - 0.5.
  ImageF ramp(128, 128, 3);
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x)
      for (int c = 0; c < 3; ++c) ramp.at(y, x, c) = static_cast<float>(x);
  const auto r = upsample_bilinear(ramp);
  for (int X = 2; X < 510; ++X) REQUIRE(r.at(100, X, 1) == doctest::Approx((X + 0.5) / 4.0 - 0.5).epsilon(1e-5));

  CHECK_THROWS_AS(upsample_bilinear(ImageF(64, 64, 3)), ShapeError);
  CHECK_THROWS_AS(downsample_to_original(ImageF(128, 128, 3)), ShapeError);
}

TEST_CASE("downsample(upsample(x)) stays close to x") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto x = to_float(synthesize_image(seed));
    const auto back = downsample_to_original(upsample_bilinear(x));
    double err = 0;
    for (std::size_t i = 0; i < x.data.size(); ++i) err += std::abs(back.data[i] - x.data[i]);
    CHECK(err / static_cast<double>(x.data.size()) <= 2.0);
  }
}

TEST_CASE("model range mapping") {
  ImageF img(1, 3, 1);
  img.data = {0.0f, 127.5f, 255.0f};
  const auto m = to_model_range(img);
  CHECK(m.range == ValueRange::Signed);
  CHECK(m.data[0] == -1.0f);
  CHECK(m.data[1] == 0.0f);
  CHECK(m.data[2] == 1.0f);
  const auto x = testing::random_image(16, 16, 8);
  const auto back = to_u8(from_model_range(to_model_range(x)));
  CHECK(back == x);
  CHECK_THROWS_AS(from_model_range(img), PreconditionError);
  CHECK_THROWS_AS(to_model_range(m), PreconditionError);
}

TEST_CASE("dataset materialisation round trips and is deterministic") {
  testing::TempDir src("src"), a("dsa"), b("dsb");
  write_synthetic_corpus(src.path(), 6, 2);
  const auto s1 = split(build_pairs(src.path()), 0.8, 3);
  write_dataset(s1, a.path(), codec::kMaxCompressionQuality);
  write_dataset(split(build_pairs(src.path()), 0.8, 3), b.path(), codec::kMaxCompressionQuality);
  CHECK(read_file(a / kManifestName) == read_file(b / kManifestName));

  const auto loaded = load_dataset(a.path());
  REQUIRE(loaded.train.size() == s1.train.size());
  REQUIRE(loaded.test.size() == s1.test.size());
  for (std::size_t i = 0; i < s1.train.size(); ++i) {
    CHECK(loaded.train[i].source_id == s1.train[i].source_id);
    CHECK(loaded.train[i].original == s1.train[i].original);
    CHECK(loaded.train[i].compressed == s1.train[i].compressed);
  }
  CHECK(loaded.seed == 3u);
  CHECK(std::filesystem::exists(a / ("jpeg/" + s1.train[0].source_id + ".jpg")));
}

TEST_CASE("manifest parsing") {
  std::vector<ManifestRecord> recs{{"a", "train", "original/a.png", "compressed/a.png", "jpeg/a.jpg", 100, 5, 1, 9},
                                   {"b", "test", "original/b.png", "compressed/b.png", "jpeg/b.jpg", 200, 6, 1, 9}};
  CHECK(parse_manifest(format_manifest(recs)) == recs);
  CHECK_THROWS_AS(parse_manifest("{\"source_id\": 1}\n"), ParseError);
  CHECK_THROWS_AS(parse_manifest("not json\n"), ParseError);
}

TEST_CASE("synthetic images are seeded") {
  CHECK(synthesize_image(3) == synthesize_image(3));
  CHECK(synthesize_image(3) != synthesize_image(4));
  const auto img = synthesize_image(3);
  CHECK(img.height == 128);
  CHECK(img.channels == 3);
}

}  // TEST_SUITE
