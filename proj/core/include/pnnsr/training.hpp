#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pnnsr/error.hpp"
#include "pnnsr/image.hpp"
#include "pnnsr/kernelnet.hpp"

namespace pnnsr {

using Rng = std::mt19937_64;

struct TrainConfig {
  double sigma = 0.0;           ///< input noise, gray levels
  int frames = 25;              ///< N samples per pattern
  int scale = 3;                ///< L, HR pixels per LR pixel
  int patterns = 5000;
  double scatter_radius = 1.5;  ///< LR pixels
  int restarts = 10;
  int cg_max_iters = 500;
  double cg_tol = 1e-6;
  std::uint64_t seed = 1;
  int hidden_units = kDefaultHiddenUnits;
  unsigned threads = 1;         ///< restart workers, 0 = auto

  /// Throws std::invalid_argument describing the first bad field.
  void validate() const;
};

/// Draws target sites from one still image with probability proportional to
/// the 3x3-smoothed gradient magnitude plus 1% of its mean, restricted to the
/// interior band that keeps every pattern footprint inside the image.
class TargetSampler {
 public:
  TargetSampler(const Image& img, int scale, double scatter_radius);

  /// Site plus uniform jitter in [-0.5, 0.5)^2.
  Point2 sample(Rng& rng) const;

  int margin() const { return margin_; }
  /// Selection probability of the site at image pixel (x, y); 0 outside the
  /// interior band.
  double probability(int x, int y) const;

 private:
  int width_ = 0;
  int height_ = 0;
  int margin_ = 0;
  int inner_width_ = 0;
  std::vector<double> cdf_;
};

/// Smallest image side accepted for (scale, scatter_radius): 2 * margin + 1
/// with margin = ceil(scale * (scatter_radius + 1)).
int minimum_training_image_side(int scale, double scatter_radius);

Point2 sample_target_location(const Image& img, int scale, double scatter_radius, Rng& rng);

/// Mean of the L x L bilinear samples at center + (i - (L-1)/2, j - (L-1)/2):
/// the value of one LR pixel whose footprint is centered at `center`.
/// Throws std::invalid_argument if the footprint leaves the image.
double synth_lowres_pixel(const Image& img, Point2 center, int scale);

/// Same operator without the bounds check (bilinear sampling clamps).
double box_sample(const Image& img, Point2 center, int scale);

/// Target from the noiseless image at `location`; sample s taken at
/// location + offsets[s] * L (offsets in LR pixels) with N(0, sigma^2) noise;
/// distance |offset| * L in HR pixels.
TrainingPattern make_pattern_at(const Image& img, const TrainConfig& cfg, Point2 location,
                                std::span<const Point2> offsets, Rng& rng);

/// Uniform offsets in the disk of radius cfg.scatter_radius. Location and
/// offsets consume the same draws from `rng` whatever cfg.sigma is; the noise
/// uses a per-pattern stream seeded from one further draw.
TrainingPattern make_pattern(const Image& img, const TargetSampler& sampler,
                             const TrainConfig& cfg, Rng& rng);
TrainingPattern make_pattern(const Image& img, const TrainConfig& cfg, Rng& rng);

/// cfg.patterns patterns drawn round-robin over `images`; a pure function of
/// (images, cfg).
std::vector<TrainingPattern> make_dataset(const std::vector<Image>& images, const TrainConfig& cfg);

/// Mean over patterns of 1/2 (o - t)^2 with the MLP kernel.
double batch_loss(const KernelMlp& net, std::span<const TrainingPattern> data);

struct BatchGradient {
  double loss = 0.0;
  std::vector<double> grad;
  std::size_t skipped = 0;
};

/// Mean loss and gradient. Patterns are reduced in fixed-size chunks in
/// index order, so the result is bitwise reproducible.
BatchGradient batch_gradient(const KernelMlp& net, std::span<const TrainingPattern> data);

/// Weight init: hidden w, b ~ U(-1, 1), output weights ~ U(-0.1, 0.1),
/// output bias 1.
KernelMlp initial_network(int hidden_units, Rng& rng);

struct RestartReport {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  int iterations = 0;
  std::size_t skipped_patterns = 0;
  bool diverged = false;
  std::string stop_reason;
  std::vector<double> curve;
};

struct TrainReport {
  std::vector<RestartReport> restarts;
  std::size_t selected = 0;
};

struct TrainResult {
  KernelMlp net;
  double final_loss = 0.0;
  TrainReport report;
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, TrainReport report)
      : Error(what), report_(std::move(report)) {}
  const TrainReport& report() const { return report_; }

 private:
  TrainReport report_;
};

/// Multi-restart PR conjugate-gradient training; keeps the restart with the
/// lowest final loss (lowest index on ties).
TrainResult train(std::span<const TrainingPattern> data, const TrainConfig& cfg);

/// Seed for restart `index` derived from the base seed.
std::uint64_t restart_seed(std::uint64_t seed, int index);

}  // namespace pnnsr
