#include "pnnsr/synth.hpp"

#include <numbers>
#include <random>
#include <stdexcept>

#include "pnnsr/text_io.hpp"
#include "pnnsr/training.hpp"

namespace pnnsr {

void SynthOptions::validate() const {
  if (frames < 1) throw std::invalid_argument("frames must be >= 1");
  if (scale < 1) throw std::invalid_argument("scale must be >= 1");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  if (!(max_shift >= 0.0) || !(max_rotation_deg >= 0.0) || !(max_scale_dev >= 0.0) ||
      max_scale_dev >= 1.0) {
    throw std::invalid_argument("jitter bounds must be non-negative (scale deviation < 1)");
  }
  if (reference_index >= static_cast<std::size_t>(frames)) {
    throw std::invalid_argument("reference index out of range");
  }
}

Image render_frame(const Image& hr, const SimilarityTransform& t, int scale, int lr_width,
                   int lr_height) {
  Image frame(lr_width, lr_height);
  for (int j = 0; j < lr_height; ++j) {
    for (int i = 0; i < lr_width; ++i) {
      const Point2 r = apply(t, {static_cast<double>(i), static_cast<double>(j)});
      const Point2 h{scale * (r.x + 0.5) - 0.5, scale * (r.y + 0.5) - 0.5};
      frame.at(i, j) = box_sample(hr, h, scale);
    }
  }
  return frame;
}

std::vector<SimilarityTransform> random_transforms(const SynthOptions& options) {
  options.validate();
  Rng rng(options.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<SimilarityTransform> out(static_cast<std::size_t>(options.frames));
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double dx = options.max_shift * unit(rng);
    const double dy = options.max_shift * unit(rng);
    const double theta = options.max_rotation_deg * std::numbers::pi / 180.0 * unit(rng);
    const double scale = 1.0 + options.max_scale_dev * unit(rng);
    if (k != options.reference_index) out[k] = {dx, dy, theta, scale};
  }
  return out;
}

SynthSequence synth_sequence(const Image& hr, const SynthOptions& options) {
  return synth_sequence(hr, options, random_transforms(options));
}

SynthSequence synth_sequence(const Image& hr, const SynthOptions& options,
                             const std::vector<SimilarityTransform>& transforms) {
  options.validate();
  if (transforms.size() != static_cast<std::size_t>(options.frames)) {
    throw std::invalid_argument("transform count does not match the frame count");
  }
  const int lr_w = hr.width() / options.scale;
  const int lr_h = hr.height() / options.scale;
  if (lr_w < 1 || lr_h < 1) throw std::invalid_argument("HR image smaller than one LR pixel");

  SynthSequence seq;
  seq.transforms = transforms;
  seq.truth = Image(lr_w * options.scale, lr_h * options.scale);
  for (int y = 0; y < seq.truth.height(); ++y)
    for (int x = 0; x < seq.truth.width(); ++x) seq.truth.at(x, y) = hr.at(x, y);

  for (std::size_t k = 0; k < transforms.size(); ++k) {
    Image frame = render_frame(seq.truth, transforms[k], options.scale, lr_w, lr_h);
    seq.frames.push_back(
        add_gaussian_noise(frame, options.sigma, restart_seed(options.seed ^ 0x5EEDull,
                                                              static_cast<int>(k))));
  }
  return seq;
}

std::string format_synth_metadata(const SynthOptions& options, const SynthSequence& seq) {
  std::string out;
  out += "frames=" + std::to_string(options.frames) + "\n";
  out += "scale=" + std::to_string(options.scale) + "\n";
  out += "sigma=" + format_real(options.sigma) + "\n";
  out += "max_shift=" + format_real(options.max_shift) + "\n";
  out += "max_rotation_deg=" + format_real(options.max_rotation_deg) + "\n";
  out += "max_scale_dev=" + format_real(options.max_scale_dev) + "\n";
  out += "seed=" + std::to_string(options.seed) + "\n";
  out += "reference_index=" + std::to_string(options.reference_index) + "\n";
  out += "lr_width=" + std::to_string(seq.frames.front().width()) + "\n";
  out += "lr_height=" + std::to_string(seq.frames.front().height()) + "\n";
  out += "hr_width=" + std::to_string(seq.truth.width()) + "\n";
  out += "hr_height=" + std::to_string(seq.truth.height()) + "\n";
  return out;
}

}  // namespace pnnsr
