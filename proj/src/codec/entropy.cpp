// Baseline sequential JFIF bitstream writer and parser.

#include <algorithm>
#include <array>
#include <optional>
#include <string>

#include "jpr/codec/jpeg.hpp"
#include "jpr/error.hpp"

namespace jpr::codec {
namespace {

// Annex K.3 tables: code-length counts (1..16 bits) followed by symbols.
struct HuffmanSpec {
  std::array<std::uint8_t, 16> counts;
  std::vector<std::uint8_t> symbols;
};

const HuffmanSpec kDcLuma = {{0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0},
                             {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}};
const HuffmanSpec kDcChroma = {{0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0},
                               {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}};
const HuffmanSpec kAcLuma = {
    {0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d},
    {0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61,
     0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08, 0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52,
     0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0a, 0x16, 0x17, 0x18, 0x19, 0x1a, 0x25,
     0x26, 0x27, 0x28, 0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44, 0x45,
     0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63, 0x64,
     0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x83,
     0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99,
     0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6,
     0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3,
     0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8,
     0xe9, 0xea, 0xf1, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa}};
const HuffmanSpec kAcChroma = {
    {0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77},
    {0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41, 0x51, 0x07, 0x61,
     0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91, 0xa1, 0xb1, 0xc1, 0x09, 0x23, 0x33,
     0x52, 0xf0, 0x15, 0x62, 0x72, 0xd1, 0x0a, 0x16, 0x24, 0x34, 0xe1, 0x25, 0xf1, 0x17, 0x18,
     0x19, 0x1a, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44,
     0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63,
     0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a,
     0x82, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97,
     0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4,
     0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca,
     0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7,
     0xe8, 0xe9, 0xea, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa}};

constexpr std::uint8_t kSOI = 0xD8, kEOI = 0xD9, kSOF0 = 0xC0, kSOF1 = 0xC1, kDHT = 0xC4,
                       kDQT = 0xDB, kSOS = 0xDA, kDRI = 0xDD, kAPP0 = 0xE0, kCOM = 0xFE;

constexpr int kMaxDcCategory = 11;
constexpr int kMaxAcCategory = 10;

struct EncodeTable {
  std::array<std::uint16_t, 256> code{};
  std::array<std::uint8_t, 256> length{};
};

EncodeTable build_encode_table(const HuffmanSpec& spec) {
  EncodeTable t;
  std::uint16_t code = 0;
  std::size_t k = 0;
  for (int len = 1; len <= 16; ++len) {
    for (int i = 0; i < spec.counts[len - 1]; ++i, ++k) {
      t.code[spec.symbols[k]] = code++;
      t.length[spec.symbols[k]] = static_cast<std::uint8_t>(len);
    }
    code <<= 1;
  }
  return t;
}

// Canonical decoding tables (Annex F.2.2.3).
struct DecodeTable {
  HuffmanSpec spec;
  std::array<int, 17> mincode{};
  std::array<int, 17> maxcode{};
  std::array<int, 17> valptr{};
};

DecodeTable build_decode_table(HuffmanSpec spec) {
  DecodeTable t;
  int code = 0, k = 0;
  for (int len = 1; len <= 16; ++len) {
    const int n = spec.counts[len - 1];
    t.valptr[len] = k;
    t.mincode[len] = code;
    code += n;
    k += n;
    t.maxcode[len] = n ? code - 1 : -1;
    code <<= 1;
  }
  t.spec = std::move(spec);
  return t;
}

int category(int v) {
  unsigned a = static_cast<unsigned>(v < 0 ? -v : v);
  int n = 0;
  while (a) {
    ++n;
    a >>= 1;
  }
  return n;
}

class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void put(std::uint32_t bits, int count) {
    for (int i = count - 1; i >= 0; --i) {
      acc_ = static_cast<std::uint8_t>((acc_ << 1) | ((bits >> i) & 1u));
      if (++filled_ == 8) emit();
    }
  }

  // Pads the final byte with 1-bits.
  void flush() {
    while (filled_ != 0) {
      acc_ = static_cast<std::uint8_t>((acc_ << 1) | 1u);
      if (++filled_ == 8) emit();
    }
  }

 private:
  void emit() {
    out_.push_back(acc_);
    if (acc_ == 0xFF) out_.push_back(0x00);
    acc_ = 0;
    filled_ = 0;
  }

  std::vector<std::uint8_t>& out_;
  std::uint8_t acc_ = 0;
  int filled_ = 0;
};

void put_u16(std::vector<std::uint8_t>& out, int v) {
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

void put_marker(std::vector<std::uint8_t>& out, std::uint8_t m) {
  out.push_back(0xFF);
  out.push_back(m);
}

void write_headers(std::vector<std::uint8_t>& out, const QuantizedImage& q) {
  put_marker(out, kSOI);

  put_marker(out, kAPP0);
  put_u16(out, 16);
  for (char c : std::string_view("JFIF\0", 5)) out.push_back(static_cast<std::uint8_t>(c));
  out.insert(out.end(), {1, 1, 0});
  put_u16(out, 1);
  put_u16(out, 1);
  out.insert(out.end(), {0, 0});

  put_marker(out, kDQT);
  put_u16(out, 2 + 2 * 65);
  for (int id = 0; id < 2; ++id) {
    out.push_back(static_cast<std::uint8_t>(id));
    const auto scanned = zigzag(id == 0 ? q.tables.luma : q.tables.chroma);
    for (auto v : scanned) {
      if (v < 1 || v > 255) throw PreconditionError("quantization entry outside [1,255]");
      out.push_back(static_cast<std::uint8_t>(v));
    }
  }

  put_marker(out, kSOF0);
  put_u16(out, 17);
  out.push_back(8);
  put_u16(out, q.height);
  put_u16(out, q.width);
  out.push_back(3);
  out.insert(out.end(), {1, 0x22, 0, 2, 0x11, 1, 3, 0x11, 1});

  put_marker(out, kDHT);
  const std::array<std::pair<std::uint8_t, const HuffmanSpec*>, 4> tables = {
      {{0x00, &kDcLuma}, {0x10, &kAcLuma}, {0x01, &kDcChroma}, {0x11, &kAcChroma}}};
  int length = 2;
  for (const auto& [tc, spec] : tables) length += 17 + static_cast<int>(spec->symbols.size());
  put_u16(out, length);
  for (const auto& [tc, spec] : tables) {
    out.push_back(tc);
    out.insert(out.end(), spec->counts.begin(), spec->counts.end());
    out.insert(out.end(), spec->symbols.begin(), spec->symbols.end());
  }

  put_marker(out, kSOS);
  put_u16(out, 12);
  out.push_back(3);
  out.insert(out.end(), {1, 0x00, 2, 0x11, 3, 0x11});
  out.insert(out.end(), {0, 63, 0});
}

void encode_block(BitWriter& bw, const QuantizedBlock& natural, int& pred, const EncodeTable& dc,
                  const EncodeTable& ac) {
  const auto zz = zigzag(natural);
  const int diff = zz[0] - pred;
  pred = zz[0];
  const int s = category(diff);
  if (s > kMaxDcCategory)
    throw PreconditionError("DC difference " + std::to_string(diff) + " exceeds baseline range");
  bw.put(dc.code[s], dc.length[s]);
  if (s) bw.put(static_cast<std::uint32_t>(diff < 0 ? diff + (1 << s) - 1 : diff), s);

  int run = 0;
  for (int k = 1; k < kBlockArea; ++k) {
    const int v = zz[k];
    if (v == 0) {
      ++run;
      continue;
    }
    while (run > 15) {
      bw.put(ac.code[0xF0], ac.length[0xF0]);
      run -= 16;
    }
    const int size = category(v);
    if (size > kMaxAcCategory)
      throw PreconditionError("AC coefficient " + std::to_string(v) + " exceeds baseline range");
    const int symbol = (run << 4) | size;
    bw.put(ac.code[symbol], ac.length[symbol]);
    bw.put(static_cast<std::uint32_t>(v < 0 ? v + (1 << size) - 1 : v), size);
    run = 0;
  }
  if (run > 0) bw.put(ac.code[0x00], ac.length[0x00]);
}

// --- parsing ---------------------------------------------------------------

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }
  bool at_end() const { return pos_ >= bytes_.size(); }
  std::span<const std::uint8_t> bytes() const { return bytes_; }

  std::uint8_t u8() {
    if (pos_ >= bytes_.size()) throw ParseError("truncated JPEG stream at byte " + std::to_string(pos_));
    return bytes_[pos_++];
  }
  int u16() {
    const int hi = u8();
    return (hi << 8) | u8();
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

// Reads entropy-coded bits, undoing 0xFF00 stuffing. Running into a marker or
// the end of input while bits are still required means the scan is truncated.
class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> bytes, std::size_t start) : bytes_(bytes), pos_(start) {}

  int bit() {
    if (left_ == 0) fill();
    --left_;
    return (cur_ >> left_) & 1;
  }

  int bits(int n) {
    int v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | bit();
    return v;
  }

  // Position just after the last consumed byte of entropy-coded data.
  std::size_t pos() const { return pos_; }

 private:
  void fill() {
    if (pos_ >= bytes_.size()) throw ParseError("truncated JPEG scan data");
    const std::uint8_t b = bytes_[pos_];
    if (b == 0xFF) {
      if (pos_ + 1 >= bytes_.size()) throw ParseError("truncated JPEG scan data");
      if (bytes_[pos_ + 1] != 0x00)
        throw ParseError("JPEG scan data ended early (marker inside scan)");
      pos_ += 2;
    } else {
      ++pos_;
    }
    cur_ = b;
    left_ = 8;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
  std::uint8_t cur_ = 0;
  int left_ = 0;
};

int decode_symbol(BitReader& br, const DecodeTable& t) {
  int code = 0;
  for (int len = 1; len <= 16; ++len) {
    code = (code << 1) | br.bit();
    if (t.maxcode[len] >= 0 && code <= t.maxcode[len] && code >= t.mincode[len])
      return t.spec.symbols[static_cast<std::size_t>(t.valptr[len] + code - t.mincode[len])];
  }
  throw ParseError("invalid Huffman code in scan data");
}

int extend(int v, int s) { return v < (1 << (s - 1)) ? v - (1 << s) + 1 : v; }

struct FrameComponent {
  int id = 0;
  int h = 1, v = 1;
  int tq = 0;
  int td = 0, ta = 0;
};

void decode_block(BitReader& br, QuantizedBlock& natural, int& pred, const DecodeTable& dc,
                  const DecodeTable& ac) {
  std::array<int, kBlockArea> zz{};
  const int s = decode_symbol(br, dc);
  if (s > kMaxDcCategory) throw ParseError("invalid DC category");
  const int diff = s ? extend(br.bits(s), s) : 0;
  pred += diff;
  zz[0] = pred;
  for (int k = 1; k < kBlockArea;) {
    const int rs = decode_symbol(br, ac);
    const int run = rs >> 4, size = rs & 0x0F;
    if (size == 0) {
      if (run == 15) {
        k += 16;
        continue;
      }
      break;  // EOB
    }
    k += run;
    if (k >= kBlockArea) throw ParseError("AC run exceeds block length");
    zz[k++] = extend(br.bits(size), size);
  }
  natural = inverse_zigzag(zz);
}

int infer_quality(const QuantTableSet& tables) {
  for (int q = 1; q <= 100; ++q) {
    const auto candidate = scale_quant_tables(q);
    if (candidate.luma == tables.luma && candidate.chroma == tables.chroma) return q;
  }
  return 0;
}

}  // namespace

GridLayout grid_layout(int height, int width) {
  const int ch = (height + 1) / 2, cw = (width + 1) / 2;
  return {(width + 7) / 8, (height + 7) / 8, (cw + 7) / 8, (ch + 7) / 8};
}

JpegBitstream encode_entropy(const QuantizedImage& q) {
  if (q.height < 1 || q.width < 1 || q.height > 65535 || q.width > 65535)
    throw PreconditionError("frame dimensions outside baseline JPEG range");
  const auto layout = grid_layout(q.height, q.width);
  const auto& comps = q.grid.components;
  if (comps[0].blocks_wide != layout.luma_wide || comps[0].blocks_high != layout.luma_high)
    throw ShapeError("luma block grid does not match frame size");
  for (int c = 1; c < 3; ++c)
    if (comps[c].blocks_wide != layout.chroma_wide || comps[c].blocks_high != layout.chroma_high)
      throw ShapeError("chroma block grid does not match frame size");

  JpegBitstream bs;
  bs.source_height = q.height;
  bs.source_width = q.width;
  auto& out = bs.bytes;
  out.reserve(1024);
  write_headers(out, q);

  static const EncodeTable dc_luma = build_encode_table(kDcLuma);
  static const EncodeTable ac_luma = build_encode_table(kAcLuma);
  static const EncodeTable dc_chroma = build_encode_table(kDcChroma);
  static const EncodeTable ac_chroma = build_encode_table(kAcChroma);

  // Blocks that pad the last MCU row/column beyond the component grid are
  // coded as DC-repeat + EOB and dropped again by the decoder.
  const QuantizedBlock zero{};
  BitWriter bw(out);
  std::array<int, 3> pred{};
  const int mcus_wide = (q.width + 15) / 16, mcus_high = (q.height + 15) / 16;
  for (int my = 0; my < mcus_high; ++my) {
    for (int mx = 0; mx < mcus_wide; ++mx) {
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          const int by = 2 * my + dy, bx = 2 * mx + dx;
          if (by < comps[0].blocks_high && bx < comps[0].blocks_wide) {
            encode_block(bw, comps[0].at(by, bx), pred[0], dc_luma, ac_luma);
          } else {
            QuantizedBlock pad = zero;
            pad[0] = pred[0];
            encode_block(bw, pad, pred[0], dc_luma, ac_luma);
          }
        }
      for (int c = 1; c < 3; ++c) {
        if (my < comps[c].blocks_high && mx < comps[c].blocks_wide) {
          encode_block(bw, comps[c].at(my, mx), pred[c], dc_chroma, ac_chroma);
        } else {
          QuantizedBlock pad = zero;
          pad[0] = pred[c];
          encode_block(bw, pad, pred[c], dc_chroma, ac_chroma);
        }
      }
    }
  }
  bw.flush();
  put_marker(out, kEOI);
  bs.encoded_size = out.size();
  return bs;
}

QuantizedImage decode_entropy(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (bytes.size() < 2 || bytes[0] != 0xFF || bytes[1] != kSOI)
    throw ParseError("not a JPEG stream: missing SOI marker");
  r.seek(2);

  std::array<std::optional<QuantTable>, 4> qtables;
  std::array<std::optional<DecodeTable>, 4> dc_tables, ac_tables;
  std::vector<FrameComponent> frame;
  int height = 0, width = 0;
  bool scanned = false;
  QuantizedImage result;

  while (true) {
    std::uint8_t b = r.u8();
    if (b != 0xFF) throw ParseError("expected marker at byte " + std::to_string(r.pos() - 1));
    std::uint8_t marker = r.u8();
    while (marker == 0xFF) marker = r.u8();

    if (marker == kEOI) {
      if (!scanned) throw ParseError("JPEG stream has no scan");
      break;
    }
    if (marker == kSOI) throw ParseError("unexpected SOI inside stream");
    if (marker >= 0xD0 && marker <= 0xD7) throw UnsupportedError("restart markers are not supported");

    const std::size_t seg_start = r.pos();
    const int len = r.u16();
    if (len < 2) throw ParseError("invalid segment length");
    const std::size_t seg_end = seg_start + static_cast<std::size_t>(len);
    if (seg_end > bytes.size()) throw ParseError("truncated JPEG segment");

    switch (marker) {
      case kDQT:
        while (r.pos() < seg_end) {
          const int pq_tq = r.u8();
          if ((pq_tq >> 4) != 0) throw UnsupportedError("16-bit quantization tables");
          const int id = pq_tq & 0x0F;
          if (id > 3) throw ParseError("invalid quantization table id");
          std::array<std::uint16_t, kBlockArea> scanned_q{};
          for (auto& v : scanned_q) {
            v = r.u8();
            if (v == 0) throw ParseError("zero quantization step");
          }
          qtables[id] = inverse_zigzag(scanned_q);
        }
        break;
      case kDHT:
        while (r.pos() < seg_end) {
          const int tc_th = r.u8();
          const int tc = tc_th >> 4, th = tc_th & 0x0F;
          if (tc > 1 || th > 3) throw ParseError("invalid Huffman table class/id");
          HuffmanSpec spec;
          int total = 0;
          for (auto& n : spec.counts) total += (n = r.u8());
          if (total > 256) throw ParseError("Huffman table too large");
          spec.symbols.resize(static_cast<std::size_t>(total));
          for (auto& s : spec.symbols) s = r.u8();
          (tc == 0 ? dc_tables : ac_tables)[th] = build_decode_table(std::move(spec));
        }
        break;
      case kSOF0:
      case kSOF1: {
        if (r.u8() != 8) throw UnsupportedError("only 8-bit sample precision is supported");
        height = r.u16();
        width = r.u16();
        const int n = r.u8();
        if (height == 0 || width == 0) throw UnsupportedError("DNL-defined frame height");
        if (n != 3) throw UnsupportedError("only 3-component YCbCr frames are supported");
        frame.resize(3);
        for (auto& fc : frame) {
          fc.id = r.u8();
          const int hv = r.u8();
          fc.h = hv >> 4;
          fc.v = hv & 0x0F;
          fc.tq = r.u8();
          if (fc.tq > 3) throw ParseError("invalid quantization table selector");
        }
        if (frame[0].h != 2 || frame[0].v != 2 || frame[1].h != 1 || frame[1].v != 1 ||
            frame[2].h != 1 || frame[2].v != 1)
          throw UnsupportedError("only 4:2:0 chroma subsampling is supported");
        break;
      }
      case kDRI:
        if (r.u16() != 0) throw UnsupportedError("restart intervals are not supported");
        break;
      case kSOS: {
        if (frame.empty()) throw ParseError("SOS before SOF");
        if (scanned) throw UnsupportedError("multi-scan JPEG streams are not supported");
        const int ns = r.u8();
        if (ns != 3) throw UnsupportedError("non-interleaved scans are not supported");
        for (int i = 0; i < ns; ++i) {
          const int id = r.u8();
          const int t = r.u8();
          auto it = std::find_if(frame.begin(), frame.end(),
                                 [id](const FrameComponent& fc) { return fc.id == id; });
          if (it == frame.end()) throw ParseError("scan references unknown component");
          if (it - frame.begin() != i) throw UnsupportedError("scan component order differs from frame");
          it->td = t >> 4;
          it->ta = t & 0x0F;
          if (it->td > 3 || it->ta > 3) throw ParseError("invalid Huffman table selector");
        }
        const int ss = r.u8(), se = r.u8(), ahal = r.u8();
        if (ss != 0 || se != 63 || ahal != 0) throw UnsupportedError("progressive scans are not supported");
        r.seek(seg_end);

        for (const auto& fc : frame) {
          if (!qtables[fc.tq]) throw ParseError("missing quantization table");
          if (!dc_tables[fc.td] || !ac_tables[fc.ta]) throw ParseError("missing Huffman table");
        }
        if (frame[1].tq != frame[2].tq)
          throw UnsupportedError("chroma components must share a quantization table");

        result.height = height;
        result.width = width;
        result.tables.luma = *qtables[frame[0].tq];
        result.tables.chroma = *qtables[frame[1].tq];
        result.tables.quality = infer_quality(result.tables);

        const auto layout = grid_layout(height, width);
        auto& comps = result.grid.components;
        comps[0] = {layout.luma_wide, layout.luma_high, {}};
        comps[1] = comps[2] = {layout.chroma_wide, layout.chroma_high, {}};
        for (auto& c : comps) c.blocks.resize(static_cast<std::size_t>(c.blocks_wide) * c.blocks_high);

        BitReader br(bytes, r.pos());
        std::array<int, 3> pred{};
        QuantizedBlock scratch{};
        const int mcus_wide = (width + 15) / 16, mcus_high = (height + 15) / 16;
        for (int my = 0; my < mcus_high; ++my) {
          for (int mx = 0; mx < mcus_wide; ++mx) {
            for (int dy = 0; dy < 2; ++dy)
              for (int dx = 0; dx < 2; ++dx) {
                const int by = 2 * my + dy, bx = 2 * mx + dx;
                const bool inside = by < comps[0].blocks_high && bx < comps[0].blocks_wide;
                decode_block(br, inside ? comps[0].at(by, bx) : scratch, pred[0],
                             *dc_tables[frame[0].td], *ac_tables[frame[0].ta]);
              }
            for (int c = 1; c < 3; ++c) {
              const bool inside = my < comps[c].blocks_high && mx < comps[c].blocks_wide;
              decode_block(br, inside ? comps[c].at(my, mx) : scratch, pred[c],
                           *dc_tables[frame[c].td], *ac_tables[frame[c].ta]);
            }
          }
        }
        // Skip fill bytes up to the next marker.
        std::size_t p = br.pos();
        while (p < bytes.size() && bytes[p] != 0xFF) ++p;
        r.seek(p);
        scanned = true;
        continue;
      }
      default:
        if (marker == 0xC2 || marker == 0xC3 || (marker >= 0xC5 && marker <= 0xCF && marker != 0xC8 && marker != 0xCC))
          throw UnsupportedError("only baseline sequential JPEG is supported");
        // APPn, COM and anything else with a length field is skipped.
        break;
    }
    r.seek(seg_end);
  }
  if (frame.empty()) throw ParseError("JPEG stream has no frame header");
  return result;
}

}  // namespace jpr::codec
