#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pnnsr/image.hpp"
#include "pnnsr/registration.hpp"

namespace pnnsr {

/// Degradation model for synthetic sequences: random similarity jitter per
/// non-reference frame, L x L box averaging (the synth_lowres_pixel
/// operator) and additive Gaussian noise.
struct SynthOptions {
  int frames = 25;
  int scale = 3;
  double sigma = 0.0;
  double max_shift = 1.0;         ///< LR pixels, per axis
  double max_rotation_deg = 1.0;
  double max_scale_dev = 0.01;
  std::uint64_t seed = 1;
  std::size_t reference_index = 0;

  void validate() const;
};

struct SynthSequence {
  std::vector<Image> frames;
  /// Frame -> reference maps in LR pixel units; the reference is identity.
  std::vector<SimilarityTransform> transforms;
  /// HR ground truth on the output grid (input cropped to a multiple of L).
  Image truth;
};

/// Renders one LR frame of size lr_width x lr_height: pixel p takes the box
/// average of `hr` around the HR position of apply(t, p).
Image render_frame(const Image& hr, const SimilarityTransform& t, int scale, int lr_width,
                   int lr_height);

/// Random jitter transforms with the reference frame fixed to identity.
std::vector<SimilarityTransform> random_transforms(const SynthOptions& options);

SynthSequence synth_sequence(const Image& hr, const SynthOptions& options);
SynthSequence synth_sequence(const Image& hr, const SynthOptions& options,
                             const std::vector<SimilarityTransform>& transforms);

/// Sidecar "key=value" lines echoing every option.
std::string format_synth_metadata(const SynthOptions& options, const SynthSequence& seq);

}  // namespace pnnsr
