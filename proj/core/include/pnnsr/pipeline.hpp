#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "pnnsr/error.hpp"
#include "pnnsr/image.hpp"
#include "pnnsr/kernelnet.hpp"
#include "pnnsr/projection.hpp"
#include "pnnsr/registration.hpp"
#include "pnnsr/restoration.hpp"

namespace pnnsr {

struct PipelineConfig {
  int scale = 3;
  std::size_t reference_index = 0;
  std::filesystem::path model_path;
  std::optional<std::filesystem::path> filter_path;
  /// When set, registration is skipped and these transforms are used.
  std::optional<std::filesystem::path> transforms_path;
  unsigned threads = 0;
  /// Forces single-threaded execution end to end.
  bool deterministic = false;
  RegistrationOptions registration;

  unsigned worker_count() const { return deterministic ? 1u : threads; }
};

class PipelineError : public Error {
 public:
  using Error::Error;
};

struct SuperresolveResult {
  Image image;
  /// Interpolated image before the restoration filter.
  Image interpolated;
  std::vector<SimilarityTransform> transforms;
  /// Nodes whose weight sum hit the degenerate guard.
  std::size_t degenerate_nodes = 0;
  double registration_ms = 0.0;
  double interpolation_ms = 0.0;
  double filtering_ms = 0.0;
};

/// Values every node of the HR grid with pnn_combine. Each node's samples are
/// visited in ascending distance (frame order on ties), which makes the output
/// independent of frame order whenever distances are distinct, and of the
/// thread count always.
Image interpolate(std::span<const Image> frames, std::span<const SimilarityTransform> transforms,
                  const Kernel& kernel, int scale, unsigned threads = 1,
                  std::size_t* degenerate_nodes = nullptr);

/// In-memory pipeline: register (unless transforms are given), interpolate,
/// then restore (if a filter is given).
SuperresolveResult superresolve(const std::vector<Image>& frames,
                                const std::optional<std::vector<SimilarityTransform>>& transforms,
                                const Kernel& kernel, const std::optional<FirFilter>& filter,
                                int scale, std::size_t reference_index = 0, unsigned threads = 1,
                                const RegistrationOptions& registration = {});

/// File-driven pipeline: loads the model, optional filter and optional
/// transforms named in cfg. Throws PipelineError on a model/scale mismatch.
SuperresolveResult superresolve(const std::vector<Image>& frames, const PipelineConfig& cfg);

}  // namespace pnnsr
