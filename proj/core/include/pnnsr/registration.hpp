#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pnnsr/error.hpp"
#include "pnnsr/image.hpp"

namespace pnnsr {

/// Frame -> reference map:
///   x' = scale * (cos(theta) x - sin(theta) y) + dx
///   y' = scale * (sin(theta) x + cos(theta) y) + dy
struct SimilarityTransform {
  double dx = 0.0;
  double dy = 0.0;
  double theta = 0.0;
  double scale = 1.0;

  static SimilarityTransform identity() { return {}; }

  friend bool operator==(const SimilarityTransform&, const SimilarityTransform&) = default;
};

/// Throws std::invalid_argument unless scale > 0 and every field is finite.
void validate(const SimilarityTransform& t);

Point2 apply(const SimilarityTransform& t, Point2 p);
SimilarityTransform invert(const SimilarityTransform& t);
/// apply(compose(a, b), p) == apply(a, apply(b, p)).
SimilarityTransform compose(const SimilarityTransform& a, const SimilarityTransform& b);

class RegistrationError : public Error {
 public:
  RegistrationError(const std::string& what, SimilarityTransform last_iterate,
                    std::optional<std::size_t> frame_index = std::nullopt)
      : Error(what), last_(last_iterate), frame_(frame_index) {}

  const SimilarityTransform& last_iterate() const { return last_; }
  std::optional<std::size_t> frame_index() const { return frame_; }

 private:
  SimilarityTransform last_;
  std::optional<std::size_t> frame_;
};

struct RegistrationOptions {
  int levels = 3;
  int max_iters = 50;
  /// Stop once the Gauss-Newton update norm (px / rad) drops below this.
  double update_tol = 1e-4;
};

struct RegistrationTrace {
  /// Estimate after each pyramid level, coarsest first, expressed at full
  /// resolution.
  std::vector<SimilarityTransform> per_level;
  std::vector<int> iterations;
};

/// Coarse-to-fine Gauss-Newton fit of the frame -> reference similarity
/// minimizing sum_p (frame(T^-1 p) - reference(p))^2 over reference pixels
/// whose back-projection lands inside the frame. Throws RegistrationError on
/// non-overlapping content or a singular normal matrix.
SimilarityTransform estimate(const Image& reference, const Image& frame,
                             const RegistrationOptions& options = {},
                             RegistrationTrace* trace = nullptr);

SimilarityTransform estimate(const Image& reference, const Image& frame, int levels, int max_iters);

/// Mean squared residual of the registration objective at full resolution.
/// Returns +inf when no reference pixel maps inside the frame.
double registration_objective(const Image& reference, const Image& frame,
                              const SimilarityTransform& frame_to_reference);

/// Registers every frame against frames[reference_index]; that entry is the
/// identity. Frames may be estimated concurrently; failures are rethrown with
/// the lowest failing frame index attached.
std::vector<SimilarityTransform> register_sequence(const std::vector<Image>& frames,
                                                   std::size_t reference_index,
                                                   const RegistrationOptions& options = {},
                                                   unsigned threads = 1);

/// Transform list text format: one "dx dy theta scale" line per frame, '#'
/// starts a comment.
std::vector<SimilarityTransform> parse_transforms(std::string_view text);
std::string format_transforms(const std::vector<SimilarityTransform>& transforms);
std::vector<SimilarityTransform> read_transforms_file(const std::filesystem::path& path);
void write_transforms_file(const std::filesystem::path& path,
                           const std::vector<SimilarityTransform>& transforms);

}  // namespace pnnsr
