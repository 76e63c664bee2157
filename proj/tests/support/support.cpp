#include "support.hpp"

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <random>
#include <stdexcept>

#include <jpeglib.h>

namespace jpr::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  std::string pattern = (fs::temp_directory_path() / (tag + "-XXXXXX")).string();
  if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

ImageU8 random_image(int height, int width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ImageU8 img(height, width, 3);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng() & 0xFF);
  return img;
}

namespace {

struct ErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void on_error(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<ErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

}  // namespace

ImageU8 libjpeg_decode(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo{};
  ErrorManager err{};
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = on_error;
  ImageU8 out;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw std::runtime_error(std::string("libjpeg: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  cinfo.dct_method = JDCT_FLOAT;
  cinfo.do_fancy_upsampling = FALSE;
  jpeg_start_decompress(&cinfo);
  out = ImageU8(static_cast<int>(cinfo.output_height), static_cast<int>(cinfo.output_width), 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = &out.data[static_cast<std::size_t>(cinfo.output_scanline) * out.width * 3];
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return out;
}

std::vector<std::uint8_t> libjpeg_encode(const ImageU8& rgb, int quality) {
  jpeg_compress_struct cinfo{};
  ErrorManager err{};
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = on_error;
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(buffer);
    throw std::runtime_error(std::string("libjpeg: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &size);
  cinfo.image_width = static_cast<JDIMENSION>(rgb.width);
  cinfo.image_height = static_cast<JDIMENSION>(rgb.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  cinfo.comp_info[0].h_samp_factor = 2;
  cinfo.comp_info[0].v_samp_factor = 2;
  cinfo.comp_info[1].h_samp_factor = cinfo.comp_info[1].v_samp_factor = 1;
  cinfo.comp_info[2].h_samp_factor = cinfo.comp_info[2].v_samp_factor = 1;
  cinfo.dct_method = JDCT_FLOAT;
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(&rgb.data[static_cast<std::size_t>(cinfo.next_scanline) * rgb.width * 3]);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<std::uint8_t> out(buffer, buffer + size);
  jpeg_destroy_compress(&cinfo);
  std::free(buffer);
  return out;
}

void bt601_forward(double r, double g, double b, double& y, double& cb, double& cr) {
  y = 0.299 * r + 0.587 * g + 0.114 * b;
  cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
  cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
}

double ssim_brute_force(const ImageU8& x, const ImageU8& y) {
  constexpr int n = 11;
  constexpr double sigma = 1.5;
  const double c1 = std::pow(0.01 * 255.0, 2), c2 = std::pow(0.03 * 255.0, 2);
  double kernel[n][n];
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double di = i - n / 2, dj = j - n / 2;
      kernel[i][j] = std::exp(-(di * di + dj * dj) / (2 * sigma * sigma));
      total += kernel[i][j];
    }
  auto lum = [](const ImageU8& img, int r, int c) {
    return 0.299 * img.at(r, c, 0) + 0.587 * img.at(r, c, 1) + 0.114 * img.at(r, c, 2);
  };
  double sum = 0.0;
  int windows = 0;
  for (int top = 0; top + n <= x.height; ++top)
    for (int left = 0; left + n <= x.width; ++left) {
      double mx = 0, my = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double w = kernel[i][j] / total;
          mx += w * lum(x, top + i, left + j);
          my += w * lum(y, top + i, left + j);
        }
      double vx = 0, vy = 0, cxy = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double w = kernel[i][j] / total;
          const double dx = lum(x, top + i, left + j) - mx, dy = lum(y, top + i, left + j) - my;
          vx += w * dx * dx;
          vy += w * dy * dy;
          cxy += w * dx * dy;
        }
      sum += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++windows;
    }
  return sum / windows;
}

}  // namespace jpr::testing
