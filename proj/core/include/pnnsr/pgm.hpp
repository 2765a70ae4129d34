#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "pnnsr/error.hpp"
#include "pnnsr/image.hpp"

namespace pnnsr {

class PgmError : public FormatError {
 public:
  enum class Kind { kBadMagic, kMalformedHeader, kMaxvalTooLarge, kTruncated, kBadSample };

  PgmError(Kind kind, std::size_t offset, const std::string& what)
      : FormatError(what), kind_(kind), offset_(offset) {}

  Kind kind() const { return kind_; }
  /// Byte offset of the offending token in the input stream.
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

/// Parses a P2 (ASCII) or P5 (binary) graymap with maxval <= 255. Samples
/// become real intensities unchanged (no maxval normalization).
Image load_pgm(std::span<const std::uint8_t> bytes);
Image load_pgm(std::string_view bytes);

/// Rounds half-up, clamps to [0, 255] and writes maxval 255. The header is
/// exactly "P5\n<w> <h>\n255\n" (or P2 with one text row per image row).
std::vector<std::uint8_t> save_pgm(const Image& img, bool binary = true);

/// The byte each intensity becomes on export.
std::uint8_t quantize_gray(double value);

Image read_pgm_file(const std::filesystem::path& path);
void write_pgm_file(const std::filesystem::path& path, const Image& img, bool binary = true);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace pnnsr
