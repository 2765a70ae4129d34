#include "pnnsr/pgm.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace pnnsr {

namespace {

bool is_space(std::uint8_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ >= bytes_.size(); }

  void skip_space_and_comments() {
    while (!at_end()) {
      if (bytes_[pos_] == '#') {
        while (!at_end() && bytes_[pos_] != '\n') ++pos_;
      } else if (is_space(bytes_[pos_])) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  /// Unsigned decimal integer token; `what` names it in diagnostics.
  unsigned long read_uint(const char* what, PgmError::Kind missing_kind) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    if (at_end()) {
      throw PgmError(missing_kind, start,
                     std::string("unexpected end of data while reading ") + what + " at offset " +
                         std::to_string(start));
    }
    unsigned long value = 0;
    while (!at_end() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 0xFFFFFFFFul) {
        throw PgmError(PgmError::Kind::kMalformedHeader, start,
                       std::string(what) + " out of range at offset " + std::to_string(start));
      }
      ++pos_;
    }
    if (pos_ == start || (!at_end() && !is_space(bytes_[pos_]) && bytes_[pos_] != '#')) {
      const auto kind = missing_kind == PgmError::Kind::kTruncated ? PgmError::Kind::kBadSample
                                                                   : PgmError::Kind::kMalformedHeader;
      throw PgmError(kind, start,
                     std::string("invalid ") + what + " token at offset " + std::to_string(start));
    }
    return value;
  }

  std::uint8_t byte(std::size_t i) const { return bytes_[i]; }
  void advance(std::size_t n) { pos_ += n; }
  std::size_t remaining() const { return at_end() ? 0 : bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Image load_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw PgmError(PgmError::Kind::kBadMagic, 0, "not a P2/P5 graymap: bad magic number");
  }
  const bool binary = bytes[1] == '5';
  Reader in(bytes);
  in.advance(2);
  if (!in.at_end() && !is_space(in.byte(in.pos())) && in.byte(in.pos()) != '#') {
    throw PgmError(PgmError::Kind::kBadMagic, 0, "not a P2/P5 graymap: bad magic number");
  }

  const auto width = in.read_uint("width", PgmError::Kind::kMalformedHeader);
  const auto height = in.read_uint("height", PgmError::Kind::kMalformedHeader);
  const std::size_t maxval_offset = (in.skip_space_and_comments(), in.pos());
  const auto maxval = in.read_uint("maxval", PgmError::Kind::kMalformedHeader);
  if (width == 0 || height == 0 || width > (1u << 20) || height > (1u << 20)) {
    throw PgmError(PgmError::Kind::kMalformedHeader, 0,
                   "invalid dimensions " + std::to_string(width) + "x" + std::to_string(height));
  }
  if (maxval == 0 || maxval > 255) {
    throw PgmError(PgmError::Kind::kMaxvalTooLarge, maxval_offset,
                   "unsupported maxval " + std::to_string(maxval) + " at offset " +
                       std::to_string(maxval_offset) + " (must be 1..255)");
  }

  const std::size_t count = width * height;
  std::vector<double> data(count);
  if (binary) {
    // Exactly one whitespace byte separates maxval from the raster.
    if (in.at_end()) {
      throw PgmError(PgmError::Kind::kTruncated, in.pos(), "missing raster after header");
    }
    in.advance(1);
    if (in.remaining() < count) {
      throw PgmError(PgmError::Kind::kTruncated, in.pos(),
                     "truncated raster: expected " + std::to_string(count) + " bytes at offset " +
                         std::to_string(in.pos()) + ", found " + std::to_string(in.remaining()));
    }
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t at = in.pos() + i;
      const auto v = in.byte(at);
      if (v > maxval) {
        throw PgmError(PgmError::Kind::kBadSample, at,
                       "sample exceeds maxval at offset " + std::to_string(at));
      }
      data[i] = static_cast<double>(v);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      in.skip_space_and_comments();
      const std::size_t at = in.pos();
      const auto v = in.read_uint("sample", PgmError::Kind::kTruncated);
      if (v > maxval) {
        throw PgmError(PgmError::Kind::kBadSample, at,
                       "sample exceeds maxval at offset " + std::to_string(at));
      }
      data[i] = static_cast<double>(v);
    }
  }
  return Image(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

Image load_pgm(std::string_view bytes) {
  return load_pgm(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

std::uint8_t quantize_gray(double value) {
  const double r = std::floor(value + 0.5);
  if (!(r > 0.0)) return 0;
  if (r >= 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

std::vector<std::uint8_t> save_pgm(const Image& img, bool binary) {
  std::string header = std::string(binary ? "P5" : "P2") + "\n" + std::to_string(img.width()) +
                       " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  if (binary) {
    out.reserve(out.size() + img.size());
    for (double v : img.data()) out.push_back(quantize_gray(v));
    return out;
  }
  std::string body;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (x > 0) body += ' ';
      body += std::to_string(quantize_gray(img.at(x, y)));
    }
    body += '\n';
  }
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string() + " for reading");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

Image read_pgm_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return load_pgm(std::span<const std::uint8_t>(bytes));
  } catch (const PgmError& e) {
    throw PgmError(e.kind(), e.offset(), path.string() + ": " + e.what());
  }
}

void write_pgm_file(const std::filesystem::path& path, const Image& img, bool binary) {
  const auto bytes = save_pgm(img, binary);
  write_file_bytes(path, bytes);
}

}  // namespace pnnsr
