#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pnnsr/error.hpp"
#include "pnnsr/image.hpp"

namespace pnnsr {

/// Odd-sized square restoration kernel applied by correlation:
///   out(x, y) = sum_{i,j} coeffs[j * size + i] * img(x + i - r, y + j - r)
/// with r = size / 2 and replicate padding.
struct FirFilter {
  int size = 1;
  std::vector<double> coeffs{1.0};
  double noise_sigma = 0.0;

  static FirFilter delta(int size);
  double at(int i, int j) const { return coeffs[static_cast<std::size_t>(j) * size + i]; }
  int radius() const { return size / 2; }

  /// Throws std::invalid_argument unless size is odd, >= 1 and matches the
  /// coefficient count, and every coefficient is finite.
  void validate() const;
};

struct ImagePair {
  Image degraded;
  Image target;
};

class FilterDesignError : public Error {
 public:
  using Error::Error;
};

/// Least-squares fit of the size x size correlation kernel mapping each
/// degraded image onto its target, with a 1e-8 ridge on the normal
/// equations. Pixels closer than size/2 to the border are left out of the
/// objective.
FirFilter design_filter(std::span<const ImagePair> pairs, int size, double noise_sigma = 0.0);

/// Data term minimized by design_filter: sum over pairs and interior pixels
/// of (filter(degraded) - target)^2.
double design_objective(std::span<const ImagePair> pairs, const FirFilter& filter);

/// Correlation with replicate padding; output has the input's shape. Rows
/// are split across `threads` workers with identical results.
Image apply_filter(const Image& img, const FirFilter& filter, unsigned threads = 1);

/// Text layout:
///   FIRF 1
///   size=<k> noise_sigma=<s> orientation=correlation
///   k rows of k reals
std::string format_filter(const FirFilter& filter);
FirFilter parse_filter(std::string_view text);
FirFilter read_filter_file(const std::filesystem::path& path);
void write_filter_file(const std::filesystem::path& path, const FirFilter& filter);

}  // namespace pnnsr
