#include "pnnsr/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "pnnsr/model_io.hpp"
#include "pnnsr/parallel.hpp"

namespace pnnsr {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

/// Writes frame indices into `order` by ascending distance, frame order on
/// ties. Bucketing by d^2 (uniform for points scattered over a disk) keeps
/// the expected cost linear in the frame count; distances past `cap` share
/// the last bucket.
void order_by_distance(std::span<const NeighborSample> samples, double cap,
                       std::vector<std::uint32_t>& order, std::vector<std::uint32_t>& start) {
  const std::size_t n = samples.size();
  const double to_bucket = static_cast<double>(n) / (cap * cap);
  auto bucket = [&](double d) {
    return static_cast<std::size_t>(std::min(static_cast<double>(n - 1), d * d * to_bucket));
  };
  std::fill(start.begin(), start.end(), 0u);
  for (const auto& s : samples) ++start[bucket(s.distance) + 1];
  for (std::size_t b = 1; b <= n; ++b) start[b] += start[b - 1];
  for (std::uint32_t k = 0; k < n; ++k) order[start[bucket(samples[k].distance)]++] = k;

  // Insertion sort is cheap on the bucketed sequence; strict comparison
  // keeps equal distances in frame order.
  for (std::size_t i = 1; i < n; ++i) {
    const std::uint32_t key = order[i];
    const double d = samples[key].distance;
    std::size_t j = i;
    while (j > 0 && samples[order[j - 1]].distance > d) {
      order[j] = order[j - 1];
      --j;
    }
    order[j] = key;
  }
}

}  // namespace

Image interpolate(std::span<const Image> frames, std::span<const SimilarityTransform> transforms,
                  const Kernel& kernel, int scale, unsigned threads,
                  std::size_t* degenerate_nodes) {
  if (frames.empty()) throw std::invalid_argument("interpolation needs at least one frame");
  const HighResGrid grid = HighResGrid::over(frames.front(), scale);
  const NeighborGatherer gatherer(frames, transforms, grid);
  // In-frame neighbors lie within scale * sqrt(2) / 2 of their node.
  const Kernel weights = tabulate_kernel(kernel, 2.0 * scale);
  const std::size_t n = frames.size();

  Image out(grid.width, grid.height);
  std::vector<unsigned char> degenerate(grid.node_count(), 0);
  parallel_for(static_cast<std::size_t>(grid.height), threads,
               [&](std::size_t row_begin, std::size_t row_end) {
    NeighborArray gathered(n), local(n);
    std::vector<std::uint32_t> order(n), start(n + 1);
    const double cap = scale * 0.75;  // just above the in-frame bound L / sqrt(2)
    for (std::size_t v = row_begin; v < row_end; ++v) {
      for (int u = 0; u < grid.width; ++u) {
        gatherer.gather(u, static_cast<int>(v), gathered);
        order_by_distance(gathered, cap, order, start);
        for (std::size_t k = 0; k < n; ++k) local[k] = gathered[order[k]];
        const CombineResult r = pnn_combine_detail(local, weights);
        const std::size_t node = v * static_cast<std::size_t>(grid.width) + u;
        out.data()[node] = r.value;
        degenerate[node] = r.degenerate ? 1 : 0;
      }
    }
  });
  if (degenerate_nodes != nullptr) {
    *degenerate_nodes = static_cast<std::size_t>(
        std::count(degenerate.begin(), degenerate.end(), static_cast<unsigned char>(1)));
  }
  return out;
}

SuperresolveResult superresolve(const std::vector<Image>& frames,
                                const std::optional<std::vector<SimilarityTransform>>& transforms,
                                const Kernel& kernel, const std::optional<FirFilter>& filter,
                                int scale, std::size_t reference_index, unsigned threads,
                                const RegistrationOptions& registration) {
  if (frames.empty()) throw std::invalid_argument("superresolve needs at least one frame");
  if (scale < 1) throw std::invalid_argument("scale must be >= 1");
  for (const auto& f : frames) {
    if (!f.same_shape(frames.front())) {
      throw std::invalid_argument("all frames must have the same size");
    }
  }
  if (reference_index >= frames.size()) {
    throw std::invalid_argument("reference index out of range");
  }

  SuperresolveResult result;
  auto start = std::chrono::steady_clock::now();
  if (transforms) {
    if (transforms->size() != frames.size()) {
      throw PipelineError("got " + std::to_string(transforms->size()) + " transforms for " +
                          std::to_string(frames.size()) + " frames");
    }
    for (const auto& t : *transforms) validate(t);
    result.transforms = *transforms;
  } else {
    result.transforms = register_sequence(frames, reference_index, registration, threads);
  }
  result.registration_ms = elapsed_ms(start);

  // The grid is defined over the reference frame; supplied transforms may
  // map into another frame's coordinates.
  std::vector<SimilarityTransform> to_reference = result.transforms;
  if (result.transforms[reference_index] != SimilarityTransform::identity()) {
    const auto ref_inv = invert(result.transforms[reference_index]);
    for (auto& t : to_reference) t = compose(ref_inv, t);
  }

  start = std::chrono::steady_clock::now();
  result.interpolated =
      interpolate(frames, to_reference, kernel, scale, threads, &result.degenerate_nodes);
  result.interpolation_ms = elapsed_ms(start);

  start = std::chrono::steady_clock::now();
  result.image = filter ? apply_filter(result.interpolated, *filter, threads) : result.interpolated;
  result.filtering_ms = elapsed_ms(start);
  return result;
}

SuperresolveResult superresolve(const std::vector<Image>& frames, const PipelineConfig& cfg) {
  const KernelModel model = read_model_file(cfg.model_path);
  if (model.scale != cfg.scale) {
    throw PipelineError("model was trained for scale " + std::to_string(model.scale) +
                        " but the pipeline runs at scale " + std::to_string(cfg.scale));
  }
  std::optional<FirFilter> filter;
  if (cfg.filter_path) filter = read_filter_file(*cfg.filter_path);
  std::optional<std::vector<SimilarityTransform>> transforms;
  if (cfg.transforms_path) transforms = read_transforms_file(*cfg.transforms_path);
  return superresolve(frames, transforms, MlpKernel{model.net}, filter, cfg.scale,
                      cfg.reference_index, cfg.worker_count(), cfg.registration);
}

}  // namespace pnnsr
