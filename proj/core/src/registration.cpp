#include "pnnsr/registration.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pnnsr/parallel.hpp"
#include "pnnsr/text_io.hpp"

namespace pnnsr {

void validate(const SimilarityTransform& t) {
  if (!std::isfinite(t.dx) || !std::isfinite(t.dy) || !std::isfinite(t.theta) ||
      !std::isfinite(t.scale) || !(t.scale > 0.0)) {
    throw std::invalid_argument("similarity transform needs finite fields and scale > 0");
  }
}

Point2 apply(const SimilarityTransform& t, Point2 p) {
  const double c = std::cos(t.theta);
  const double s = std::sin(t.theta);
  return {t.scale * (c * p.x - s * p.y) + t.dx, t.scale * (s * p.x + c * p.y) + t.dy};
}

SimilarityTransform invert(const SimilarityTransform& t) {
  const double inv = 1.0 / t.scale;
  const double c = std::cos(t.theta);
  const double s = std::sin(t.theta);
  // -(1/s) R(-theta) d
  return {-inv * (c * t.dx + s * t.dy), -inv * (-s * t.dx + c * t.dy), -t.theta, inv};
}

SimilarityTransform compose(const SimilarityTransform& a, const SimilarityTransform& b) {
  const Point2 shifted = apply(a, {b.dx, b.dy});
  return {shifted.x, shifted.y, a.theta + b.theta, a.scale * b.scale};
}

namespace {

/// Reference -> frame warp q = [a -b; b a] p + (tx, ty).
struct Warp {
  double a = 1.0;
  double b = 0.0;
  double tx = 0.0;
  double ty = 0.0;

  Point2 operator()(double x, double y) const { return {a * x - b * y + tx, b * x + a * y + ty}; }

  static Warp from(const SimilarityTransform& frame_to_reference) {
    const auto w = invert(frame_to_reference);
    return {w.scale * std::cos(w.theta), w.scale * std::sin(w.theta), w.dx, w.dy};
  }

  SimilarityTransform frame_to_reference() const {
    const SimilarityTransform w{tx, ty, std::atan2(b, a), std::hypot(a, b)};
    return invert(w);
  }

  /// Same warp expressed one pyramid level finer (coarse center c sits at
  /// fine coordinate 2c + 0.5).
  Warp finer() const {
    return {a, b, 2.0 * tx + 0.5 - 0.5 * (a - b), 2.0 * ty + 0.5 - 0.5 * (b + a)};
  }
};

bool inside(const Image& img, Point2 q) {
  return q.x >= 0.0 && q.y >= 0.0 && q.x <= img.width() - 1 && q.y <= img.height() - 1;
}

struct Residual {
  double sse = 0.0;
  std::size_t count = 0;

  double mean() const {
    return count == 0 ? std::numeric_limits<double>::infinity() : sse / static_cast<double>(count);
  }
};

Residual residual(const Image& reference, const Image& frame, const Warp& warp) {
  Residual r;
  for (int y = 0; y < reference.height(); ++y) {
    for (int x = 0; x < reference.width(); ++x) {
      const Point2 q = warp(x, y);
      if (!inside(frame, q)) continue;
      const double e = sample_bilinear(frame, q) - reference.at(x, y);
      r.sse += e * e;
      ++r.count;
    }
  }
  return r;
}

constexpr std::size_t kMinOverlapPixels = 16;

Warp refine_level(const Image& reference, const Image& frame, Warp warp,
                  const RegistrationOptions& options, int* iterations) {
  const Image fx = gradient_x(frame);
  const Image fy = gradient_y(frame);
  const double cx = 0.5 * (reference.width() - 1);
  const double cy = 0.5 * (reference.height() - 1);

  Residual current = residual(reference, frame, warp);
  int it = 0;
  for (; it < options.max_iters; ++it) {
    Eigen::Matrix4d normal = Eigen::Matrix4d::Zero();
    Eigen::Vector4d rhs = Eigen::Vector4d::Zero();
    std::size_t count = 0;
    for (int y = 0; y < reference.height(); ++y) {
      for (int x = 0; x < reference.width(); ++x) {
        const Point2 q = warp(x, y);
        if (!inside(frame, q)) continue;
        const double e = sample_bilinear(frame, q) - reference.at(x, y);
        const double gx = sample_bilinear(fx, q);
        const double gy = sample_bilinear(fy, q);
        const double px = x - cx;
        const double py = y - cy;
        const Eigen::Vector4d j(gx * px + gy * py, -gx * py + gy * px, gx, gy);
        normal.noalias() += j * j.transpose();
        rhs.noalias() += j * e;
        ++count;
      }
    }
    if (count < kMinOverlapPixels) {
      throw RegistrationError("registration failed: frame does not overlap the reference",
                              warp.frame_to_reference());
    }

    // Column scaling keeps the rotation/scale and translation blocks
    // comparable before the conditioning check.
    const Eigen::Vector4d diag = normal.diagonal();
    if ((diag.array() <= 0.0).any()) {
      throw RegistrationError("registration failed: singular normal matrix (no texture)",
                              warp.frame_to_reference());
    }
    const Eigen::Vector4d inv_scale = diag.cwiseSqrt().cwiseInverse();
    const Eigen::Matrix4d scaled = inv_scale.asDiagonal() * normal * inv_scale.asDiagonal();
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(scaled, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    if (!(ev.minCoeff() > 1e-10 * ev.maxCoeff())) {
      throw RegistrationError("registration failed: singular normal matrix (degenerate content)",
                              warp.frame_to_reference());
    }
    const Eigen::Vector4d delta =
        -(inv_scale.asDiagonal() * scaled.ldlt().solve(inv_scale.asDiagonal() * rhs));

    // Update in center-relative parameters: q = A (p - c) + c + t.
    const double t_x = warp.tx - cx + (warp.a * cx - warp.b * cy);
    const double t_y = warp.ty - cy + (warp.b * cx + warp.a * cy);
    double step = 1.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 10; ++halvings, step *= 0.5) {
      Warp trial;
      trial.a = warp.a + step * delta[0];
      trial.b = warp.b + step * delta[1];
      const double nt_x = t_x + step * delta[2];
      const double nt_y = t_y + step * delta[3];
      trial.tx = cx + nt_x - (trial.a * cx - trial.b * cy);
      trial.ty = cy + nt_y - (trial.b * cx + trial.a * cy);
      const Residual r = residual(reference, frame, trial);
      if (r.count >= kMinOverlapPixels && r.mean() <= current.mean()) {
        warp = trial;
        current = r;
        accepted = true;
        break;
      }
    }
    if (!accepted || step * delta.norm() < options.update_tol) {
      ++it;
      break;
    }
  }
  if (iterations != nullptr) *iterations = it;
  return warp;
}

}  // namespace

SimilarityTransform estimate(const Image& reference, const Image& frame,
                             const RegistrationOptions& options, RegistrationTrace* trace) {
  if (!reference.same_shape(frame)) {
    throw std::invalid_argument("registration needs equal-size images");
  }
  if (options.levels < 1 || options.max_iters < 1) {
    throw std::invalid_argument("registration needs levels >= 1 and max_iters >= 1");
  }

  std::vector<Image> ref_pyramid{reference};
  std::vector<Image> frame_pyramid{frame};
  while (static_cast<int>(ref_pyramid.size()) < options.levels &&
         std::min(ref_pyramid.back().width(), ref_pyramid.back().height()) >= 16) {
    ref_pyramid.push_back(downsample2(ref_pyramid.back()));
    frame_pyramid.push_back(downsample2(frame_pyramid.back()));
  }

  if (trace != nullptr) *trace = {};
  Warp warp;
  const int coarsest = static_cast<int>(ref_pyramid.size()) - 1;
  for (int level = coarsest; level >= 0; --level) {
    if (level != coarsest) warp = warp.finer();
    int iterations = 0;
    warp = refine_level(ref_pyramid[level], frame_pyramid[level], warp, options, &iterations);
    if (trace != nullptr) {
      Warp full = warp;
      for (int l = level; l > 0; --l) full = full.finer();
      trace->per_level.push_back(full.frame_to_reference());
      trace->iterations.push_back(iterations);
    }
  }
  return warp.frame_to_reference();
}

SimilarityTransform estimate(const Image& reference, const Image& frame, int levels, int max_iters) {
  RegistrationOptions options;
  options.levels = levels;
  options.max_iters = max_iters;
  return estimate(reference, frame, options);
}

double registration_objective(const Image& reference, const Image& frame,
                              const SimilarityTransform& frame_to_reference) {
  return residual(reference, frame, Warp::from(frame_to_reference)).mean();
}

std::vector<SimilarityTransform> register_sequence(const std::vector<Image>& frames,
                                                   std::size_t reference_index,
                                                   const RegistrationOptions& options,
                                                   unsigned threads) {
  if (frames.empty()) throw std::invalid_argument("register_sequence needs at least one frame");
  if (reference_index >= frames.size()) {
    throw std::invalid_argument("reference index " + std::to_string(reference_index) +
                                " out of range for " + std::to_string(frames.size()) + " frames");
  }
  std::vector<SimilarityTransform> out(frames.size());
  std::vector<std::exception_ptr> errors(frames.size());
  parallel_for(frames.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      if (k == reference_index) continue;
      try {
        out[k] = estimate(frames[reference_index], frames[k], options);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  });
  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (!errors[k]) continue;
    try {
      std::rethrow_exception(errors[k]);
    } catch (const RegistrationError& e) {
      throw RegistrationError("frame " + std::to_string(k) + ": " + e.what(), e.last_iterate(), k);
    }
  }
  return out;
}

std::vector<SimilarityTransform> parse_transforms(std::string_view text) {
  std::vector<SimilarityTransform> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    SimilarityTransform t;
    if (!(fields >> t.dx)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw FormatError("transforms line " + std::to_string(line_no) + ": expected 4 reals");
    }
    std::string extra;
    if (!(fields >> t.dy >> t.theta >> t.scale) || (fields >> extra)) {
      throw FormatError("transforms line " + std::to_string(line_no) +
                        ": expected \"dx dy theta scale\"");
    }
    try {
      validate(t);
    } catch (const std::invalid_argument& e) {
      throw FormatError("transforms line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(t);
  }
  return out;
}

std::string format_transforms(const std::vector<SimilarityTransform>& transforms) {
  std::string out = "# dx dy theta scale (frame -> reference)\n";
  for (const auto& t : transforms) {
    out += format_real(t.dx) + " " + format_real(t.dy) + " " + format_real(t.theta) + " " +
           format_real(t.scale) + "\n";
  }
  return out;
}

std::vector<SimilarityTransform> read_transforms_file(const std::filesystem::path& path) {
  try {
    return parse_transforms(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_transforms_file(const std::filesystem::path& path,
                           const std::vector<SimilarityTransform>& transforms) {
  write_text_file(path, format_transforms(transforms));
}

}  // namespace pnnsr
