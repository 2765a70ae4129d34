#include "pnnsr/projection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pnnsr/parallel.hpp"

namespace pnnsr {

HighResGrid HighResGrid::over(const Image& reference, int scale) {
  if (scale < 1) throw std::invalid_argument("grid scale must be >= 1");
  return {scale, reference.width() * scale, reference.height() * scale};
}

namespace {

void check_inputs(std::span<const Image> frames, std::span<const SimilarityTransform> transforms) {
  if (frames.empty()) throw std::invalid_argument("neighbor gathering needs at least one frame");
  if (frames.size() != transforms.size()) {
    throw std::invalid_argument("got " + std::to_string(frames.size()) + " frames but " +
                                std::to_string(transforms.size()) + " transforms");
  }
}

}  // namespace

NeighborGatherer::NeighborGatherer(std::span<const Image> frames,
                                   std::span<const SimilarityTransform> transforms,
                                   const HighResGrid& grid)
    : grid_(grid) {
  check_inputs(frames, transforms);
  maps_.reserve(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const SimilarityTransform& t = transforms[k];
    const SimilarityTransform inv = invert(t);
    maps_.push_back({&frames[k], inv.scale * std::cos(inv.theta), inv.scale * std::sin(inv.theta),
                     inv.dx, inv.dy, t.scale * std::cos(t.theta), t.scale * std::sin(t.theta),
                     t.dx, t.dy});
  }
}

void NeighborGatherer::gather(int u, int v, std::span<NeighborSample> out) const {
  const Point2 node = grid_.node_position(u, v);
  const double scale = grid_.scale;
  for (std::size_t k = 0; k < maps_.size(); ++k) {
    const FrameMap& m = maps_[k];
    const int width = m.frame->width();
    const int height = m.frame->height();
    const double qx = m.ia * node.x - m.ib * node.y + m.itx;
    const double qy = m.ib * node.x + m.ia * node.y + m.ity;
    const int px = std::clamp(static_cast<int>(std::lround(qx)), 0, width - 1);
    const int py = std::clamp(static_cast<int>(std::lround(qy)), 0, height - 1);
    const double rx = m.fa * px - m.fb * py + m.ftx - node.x;
    const double ry = m.fb * px + m.fa * py + m.fty - node.y;
    NeighborSample& s = out[k];
    s.value = m.frame->at(px, py);
    s.distance = std::sqrt(rx * rx + ry * ry) * scale;
    s.out_of_frame = qx < -1.0 || qy < -1.0 || qx > width || qy > height;
  }
}

void gather_neighbors(std::span<const Image> frames,
                      std::span<const SimilarityTransform> transforms, const HighResGrid& grid,
                      int u, int v, std::span<NeighborSample> out) {
  check_inputs(frames, transforms);
  if (u < 0 || v < 0 || u >= grid.width || v >= grid.height) {
    throw std::invalid_argument("grid node out of range");
  }
  if (out.size() != frames.size()) throw std::invalid_argument("output span has wrong length");
  NeighborGatherer(frames, transforms, grid).gather(u, v, out);
}

NeighborArray gather_neighbors(std::span<const Image> frames,
                               std::span<const SimilarityTransform> transforms,
                               const HighResGrid& grid, int u, int v) {
  NeighborArray out(frames.size());
  gather_neighbors(frames, transforms, grid, u, v, out);
  return out;
}

NeighborField::NeighborField(HighResGrid grid, std::size_t frames)
    : grid_(grid), frames_(frames), samples_(grid.node_count() * frames) {}

NeighborField build_neighbor_field(std::span<const Image> frames,
                                   std::span<const SimilarityTransform> transforms,
                                   const HighResGrid& grid, unsigned threads) {
  const NeighborGatherer gatherer(frames, transforms, grid);
  NeighborField field(grid, frames.size());
  parallel_for(static_cast<std::size_t>(grid.height), threads,
               [&](std::size_t row_begin, std::size_t row_end) {
                 for (std::size_t v = row_begin; v < row_end; ++v) {
                   for (int u = 0; u < grid.width; ++u) {
                     gatherer.gather(u, static_cast<int>(v), field.mutable_node(v * grid.width + u));
                   }
                 }
               });
  return field;
}

}  // namespace pnnsr
