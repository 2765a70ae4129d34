#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pnnsr/image.hpp"
#include "pnnsr/registration.hpp"

namespace pnnsr {

/// High-resolution output lattice at integer scale L over the reference
/// frame. Node (u, v) sits at reference coordinate
/// ((u + 0.5)/L - 0.5, (v + 0.5)/L - 0.5).
struct HighResGrid {
  int scale = 1;
  int width = 0;
  int height = 0;

  static HighResGrid over(const Image& reference, int scale);

  Point2 node_position(int u, int v) const {
    const double inv = 1.0 / scale;
    return {(u + 0.5) * inv - 0.5, (v + 0.5) * inv - 0.5};
  }
  std::size_t node_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
};

/// One frame's contribution to a grid node: the nearest pixel's value and
/// its distance to the node in HR-pixel units.
struct NeighborSample {
  double value = 0.0;
  double distance = 0.0;
  /// The node back-projects more than one LR pixel outside this frame.
  bool out_of_frame = false;

  friend bool operator==(const NeighborSample&, const NeighborSample&) = default;
};

/// Per-node network input, one entry per frame in frame order.
using NeighborArray = std::vector<NeighborSample>;

void gather_neighbors(std::span<const Image> frames,
                      std::span<const SimilarityTransform> transforms, const HighResGrid& grid,
                      int u, int v, std::span<NeighborSample> out);

NeighborArray gather_neighbors(std::span<const Image> frames,
                               std::span<const SimilarityTransform> transforms,
                               const HighResGrid& grid, int u, int v);

/// Per-frame geometry precomputed once, so gathering one node costs a few
/// flops per frame. Used for streaming passes that never hold the full field.
class NeighborGatherer {
 public:
  NeighborGatherer(std::span<const Image> frames, std::span<const SimilarityTransform> transforms,
                   const HighResGrid& grid);

  std::size_t frames() const { return maps_.size(); }
  const HighResGrid& grid() const { return grid_; }
  /// Same result as gather_neighbors, without range checks.
  void gather(int u, int v, std::span<NeighborSample> out) const;

 private:
  struct FrameMap {
    const Image* frame;
    double ia, ib, itx, ity;  // reference -> frame
    double fa, fb, ftx, fty;  // frame -> reference
  };
  std::vector<FrameMap> maps_;
  HighResGrid grid_;
};

/// Neighbor arrays for every node, row-major, stored contiguously.
class NeighborField {
 public:
  NeighborField() = default;
  NeighborField(HighResGrid grid, std::size_t frames);

  const HighResGrid& grid() const { return grid_; }
  std::size_t frames() const { return frames_; }
  std::size_t size() const { return grid_.node_count(); }

  std::span<const NeighborSample> operator[](std::size_t node) const {
    return {samples_.data() + node * frames_, frames_};
  }
  std::span<NeighborSample> mutable_node(std::size_t node) {
    return {samples_.data() + node * frames_, frames_};
  }

 private:
  HighResGrid grid_;
  std::size_t frames_ = 0;
  std::vector<NeighborSample> samples_;
};

/// gather_neighbors at every node; parallel over rows, results independent of
/// the thread count.
NeighborField build_neighbor_field(std::span<const Image> frames,
                                   std::span<const SimilarityTransform> transforms,
                                   const HighResGrid& grid, unsigned threads = 1);

}  // namespace pnnsr
