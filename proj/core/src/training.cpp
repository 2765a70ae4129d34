#include "pnnsr/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pnnsr/optimizer.hpp"
#include "pnnsr/parallel.hpp"

namespace pnnsr {

void TrainConfig::validate() const {
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  if (frames < 1) throw std::invalid_argument("frames must be >= 1");
  if (scale < 1) throw std::invalid_argument("scale must be >= 1");
  if (patterns < 1) throw std::invalid_argument("patterns must be >= 1");
  if (!(scatter_radius > 0.0)) throw std::invalid_argument("scatter_radius must be > 0");
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  if (cg_max_iters < 1) throw std::invalid_argument("cg_max_iters must be >= 1");
  if (!(cg_tol >= 0.0)) throw std::invalid_argument("cg_tol must be >= 0");
  if (hidden_units < 1) throw std::invalid_argument("hidden_units must be >= 1");
}

int minimum_training_image_side(int scale, double scatter_radius) {
  return 2 * static_cast<int>(std::ceil(scale * (scatter_radius + 1.0))) + 1;
}

TargetSampler::TargetSampler(const Image& img, int scale, double scatter_radius)
    : width_(img.width()), height_(img.height()) {
  if (scale < 1 || !(scatter_radius > 0.0)) {
    throw std::invalid_argument("target sampler needs scale >= 1 and scatter_radius > 0");
  }
  margin_ = static_cast<int>(std::ceil(scale * (scatter_radius + 1.0)));
  const int min_side = 2 * margin_ + 1;
  if (img.width() < min_side || img.height() < min_side) {
    throw std::invalid_argument("training image " + std::to_string(img.width()) + "x" +
                                std::to_string(img.height()) + " is too small; need at least " +
                                std::to_string(min_side) + "x" + std::to_string(min_side));
  }
  const Image grad = gradient_magnitude(img);
  const Image smooth = box_smooth3(grad);
  double mean = 0.0;
  for (double v : grad.data()) mean += v;
  mean /= static_cast<double>(grad.size());
  const double floor_weight = mean > 0.0 ? 0.01 * mean : 1.0;

  inner_width_ = width_ - 2 * margin_;
  const int inner_height = height_ - 2 * margin_;
  cdf_.reserve(static_cast<std::size_t>(inner_width_) * inner_height);
  double total = 0.0;
  for (int y = margin_; y < height_ - margin_; ++y) {
    for (int x = margin_; x < width_ - margin_; ++x) {
      total += smooth.at(x, y) + floor_weight;
      cdf_.push_back(total);
    }
  }
}

Point2 TargetSampler::sample(Rng& rng) const {
  std::uniform_real_distribution<double> pick(0.0, cdf_.back());
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  const double u = pick(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  const auto index = static_cast<int>(it - cdf_.begin());
  const int x = margin_ + index % inner_width_;
  const int y = margin_ + index / inner_width_;
  const double jx = jitter(rng);
  const double jy = jitter(rng);
  return {x + jx, y + jy};
}

double TargetSampler::probability(int x, int y) const {
  if (x < margin_ || y < margin_ || x >= width_ - margin_ || y >= height_ - margin_) return 0.0;
  const auto index = static_cast<std::size_t>(y - margin_) * inner_width_ + (x - margin_);
  const double lo = index == 0 ? 0.0 : cdf_[index - 1];
  return (cdf_[index] - lo) / cdf_.back();
}

Point2 sample_target_location(const Image& img, int scale, double scatter_radius, Rng& rng) {
  return TargetSampler(img, scale, scatter_radius).sample(rng);
}

double box_sample(const Image& img, Point2 center, int scale) {
  const double half = 0.5 * (scale - 1);
  double sum = 0.0;
  for (int j = 0; j < scale; ++j) {
    for (int i = 0; i < scale; ++i) {
      sum += sample_bilinear(img, {center.x + i - half, center.y + j - half});
    }
  }
  return sum / (static_cast<double>(scale) * scale);
}

double synth_lowres_pixel(const Image& img, Point2 center, int scale) {
  if (scale < 1) throw std::invalid_argument("scale must be >= 1");
  const double half = 0.5 * (scale - 1);
  if (center.x - half < 0.0 || center.y - half < 0.0 || center.x + half > img.width() - 1 ||
      center.y + half > img.height() - 1) {
    throw std::invalid_argument("low-resolution pixel footprint leaves the image");
  }
  return box_sample(img, center, scale);
}

TrainingPattern make_pattern_at(const Image& img, const TrainConfig& cfg, Point2 location,
                                std::span<const Point2> offsets, Rng& rng) {
  TrainingPattern p;
  p.target = synth_lowres_pixel(img, location, cfg.scale);
  p.samples.reserve(offsets.size());
  std::normal_distribution<double> noise(0.0, cfg.sigma > 0.0 ? cfg.sigma : 1.0);
  for (const Point2& off : offsets) {
    const Point2 c{location.x + off.x * cfg.scale, location.y + off.y * cfg.scale};
    NeighborSample s;
    s.value = synth_lowres_pixel(img, c, cfg.scale);
    if (cfg.sigma > 0.0) s.value += noise(rng);
    s.distance = std::hypot(off.x, off.y) * cfg.scale;
    p.samples.push_back(s);
  }
  return p;
}

TrainingPattern make_pattern(const Image& img, const TargetSampler& sampler,
                             const TrainConfig& cfg, Rng& rng) {
  const Point2 location = sampler.sample(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point2> offsets(static_cast<std::size_t>(cfg.frames));
  for (auto& off : offsets) {
    const double r = cfg.scatter_radius * std::sqrt(unit(rng));
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    off = {r * std::cos(phi), r * std::sin(phi)};
  }
  // Noise comes from its own stream, always seeded, so the pattern geometry
  // drawn from `rng` is the same for every sigma.
  Rng noise_rng(rng());
  return make_pattern_at(img, cfg, location, offsets, noise_rng);
}

TrainingPattern make_pattern(const Image& img, const TrainConfig& cfg, Rng& rng) {
  return make_pattern(img, TargetSampler(img, cfg.scale, cfg.scatter_radius), cfg, rng);
}

std::vector<TrainingPattern> make_dataset(const std::vector<Image>& images,
                                          const TrainConfig& cfg) {
  cfg.validate();
  if (images.empty()) throw std::invalid_argument("make_dataset needs at least one image");
  std::vector<TargetSampler> samplers;
  samplers.reserve(images.size());
  for (const auto& img : images) samplers.emplace_back(img, cfg.scale, cfg.scatter_radius);

  Rng rng(cfg.seed);
  std::vector<TrainingPattern> out;
  out.reserve(static_cast<std::size_t>(cfg.patterns));
  for (int i = 0; i < cfg.patterns; ++i) {
    const std::size_t k = static_cast<std::size_t>(i) % images.size();
    out.push_back(make_pattern(images[k], samplers[k], cfg, rng));
  }
  return out;
}

double batch_loss(const KernelMlp& net, std::span<const TrainingPattern> data) {
  if (data.empty()) throw std::invalid_argument("batch_loss needs at least one pattern");
  const Kernel kernel = MlpKernel{net};
  double sum = 0.0;
  for (const auto& p : data) {
    const double e = pnn_combine(p.samples, kernel) - p.target;
    sum += 0.5 * e * e;
  }
  return sum / static_cast<double>(data.size());
}

BatchGradient batch_gradient(const KernelMlp& net, std::span<const TrainingPattern> data) {
  if (data.empty()) throw std::invalid_argument("batch_gradient needs at least one pattern");
  constexpr std::size_t kChunk = 256;
  BatchGradient out;
  out.grad.assign(net.parameter_count(), 0.0);
  std::vector<double> chunk_grad(net.parameter_count());
  for (std::size_t begin = 0; begin < data.size(); begin += kChunk) {
    const std::size_t end = std::min(data.size(), begin + kChunk);
    std::fill(chunk_grad.begin(), chunk_grad.end(), 0.0);
    double chunk_loss = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
      bool skipped = false;
      chunk_loss += accumulate_backprop(net, data[k], chunk_grad, skipped);
      out.skipped += skipped ? 1 : 0;
    }
    out.loss += chunk_loss;
    for (std::size_t i = 0; i < chunk_grad.size(); ++i) out.grad[i] += chunk_grad[i];
  }
  const double inv = 1.0 / static_cast<double>(data.size());
  out.loss *= inv;
  for (double& g : out.grad) g *= inv;
  return out;
}

KernelMlp initial_network(int hidden_units, Rng& rng) {
  KernelMlp net(hidden_units);
  std::uniform_real_distribution<double> hidden_init(-1.0, 1.0);
  std::uniform_real_distribution<double> output_init(-0.1, 0.1);
  for (auto& h : net.hidden) {
    h.weight = hidden_init(rng);
    h.bias = hidden_init(rng);
  }
  for (auto& w : net.output_weights) w = output_init(rng);
  net.output_bias = 1.0;
  return net;
}

std::uint64_t restart_seed(std::uint64_t seed, int index) {
  // splitmix64 finalizer over (seed, index)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

TrainResult train(std::span<const TrainingPattern> data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("train needs at least one pattern");

  std::vector<KernelMlp> nets(static_cast<std::size_t>(cfg.restarts), KernelMlp(cfg.hidden_units));
  TrainReport report;
  report.restarts.resize(static_cast<std::size_t>(cfg.restarts));

  parallel_for(static_cast<std::size_t>(cfg.restarts), cfg.threads,
               [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      Rng rng(restart_seed(cfg.seed, static_cast<int>(r)));
      KernelMlp net = initial_network(cfg.hidden_units, rng);
      auto& rep = report.restarts[r];
      KernelMlp work = net;
      const Objective f = [&](std::span<const double> x, std::span<double> grad) {
        work.set_parameters(x);
        BatchGradient bg = batch_gradient(work, data);
        std::copy(bg.grad.begin(), bg.grad.end(), grad.begin());
        return bg.loss;
      };
      CgOptions opts;
      opts.max_iters = cfg.cg_max_iters;
      opts.rel_tol = cfg.cg_tol;
      opts.tol_window = 5;
      opts.restart_every = static_cast<int>(net.parameter_count());
      try {
        const CgResult res = minimize_cg(f, net.parameters(), opts);
        rep.initial_loss = res.curve.front();
        rep.final_loss = res.value;
        rep.iterations = res.iterations;
        rep.stop_reason = res.stop_reason;
        rep.curve = res.curve;
        rep.diverged = !std::isfinite(res.value);
        nets[r] = KernelMlp::from_parameters(res.x);
        rep.skipped_patterns = batch_gradient(nets[r], data).skipped;
      } catch (const Error& e) {
        rep.diverged = true;
        rep.stop_reason = e.what();
      }
    }
  });

  bool found = false;
  for (std::size_t r = 0; r < report.restarts.size(); ++r) {
    const auto& rep = report.restarts[r];
    if (rep.diverged) continue;
    if (!found || rep.final_loss < report.restarts[report.selected].final_loss) {
      report.selected = r;
      found = true;
    }
  }
  if (!found) {
    throw TrainingError("training failed: all " + std::to_string(cfg.restarts) +
                            " restarts produced a non-finite loss",
                        std::move(report));
  }
  TrainResult result;
  result.net = nets[report.selected];
  result.final_loss = report.restarts[report.selected].final_loss;
  result.report = std::move(report);
  return result;
}

}  // namespace pnnsr
