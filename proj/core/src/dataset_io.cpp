#include "pnnsr/dataset_io.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>
#include <string>

#include "pnnsr/pgm.hpp"

namespace pnnsr {

namespace {

constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void bytes(const char* s, std::size_t n) { out_.insert(out_.end(), s, s + n); }
  void u32(std::uint32_t v) { little_endian(v, 4); }
  void u64(std::uint64_t v) { little_endian(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void little_endian(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint64_t little_endian(int n) {
    if (pos_ + static_cast<std::size_t>(n) > in_.size()) {
      throw FormatError("dataset cache truncated at offset " + std::to_string(pos_));
    }
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(little_endian(4)); }
  std::uint64_t u64() { return little_endian(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_dataset(const TrainConfig& cfg,
                                         std::span<const TrainingPattern> patterns) {
  Writer w;
  w.bytes("PNND", 4);
  w.u32(kVersion);
  w.f64(cfg.sigma);
  w.u64(static_cast<std::uint64_t>(cfg.frames));
  w.u64(static_cast<std::uint64_t>(cfg.scale));
  w.u64(patterns.size());
  w.f64(cfg.scatter_radius);
  w.u64(cfg.seed);
  for (const auto& p : patterns) {
    if (p.samples.size() != static_cast<std::size_t>(cfg.frames)) {
      throw std::invalid_argument("pattern sample count does not match cfg.frames");
    }
    w.f64(p.target);
    for (const auto& s : p.samples) {
      w.f64(s.value);
      w.f64(s.distance);
    }
  }
  return w.take();
}

DatasetFile decode_dataset(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "PNND", 4) != 0) {
    throw FormatError("not a dataset cache (bad magic)");
  }
  Reader r(bytes.subspan(4));
  const auto version = r.u32();
  if (version != kVersion) {
    throw FormatError("unsupported dataset cache version " + std::to_string(version));
  }
  DatasetFile out;
  out.config.sigma = r.f64();
  const auto frames = r.u64();
  const auto scale = r.u64();
  const auto count = r.u64();
  out.config.scatter_radius = r.f64();
  out.config.seed = r.u64();
  if (frames < 1 || frames > (1u << 20) || scale < 1 || scale > (1u << 10)) {
    throw FormatError("dataset cache header out of range");
  }
  out.config.frames = static_cast<int>(frames);
  out.config.scale = static_cast<int>(scale);
  out.config.patterns = static_cast<int>(count);
  const std::uint64_t per_pattern = 8 * (1 + 2 * frames);
  if (count > r.remaining() / per_pattern || count * per_pattern != r.remaining()) {
    throw FormatError("dataset cache payload size does not match its header");
  }
  out.patterns.resize(count);
  for (auto& p : out.patterns) {
    p.target = r.f64();
    p.samples.resize(frames);
    for (auto& s : p.samples) {
      s.value = r.f64();
      s.distance = r.f64();
    }
  }
  return out;
}

void write_dataset_file(const std::filesystem::path& path, const TrainConfig& cfg,
                        std::span<const TrainingPattern> patterns) {
  const auto bytes = encode_dataset(cfg, patterns);
  write_file_bytes(path, bytes);
}

DatasetFile read_dataset_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_dataset(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace pnnsr
