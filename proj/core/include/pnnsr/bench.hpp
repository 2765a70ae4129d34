#pragma once

#include <string>
#include <vector>

#include "pnnsr/image.hpp"
#include "pnnsr/model_io.hpp"
#include "pnnsr/training.hpp"

namespace pnnsr {

struct BenchOptions {
  TrainConfig train;              ///< sigma is overridden per row
  std::vector<double> sigmas{0.0, 5.0, 10.0, 20.0};
  int eval_patterns = 2000;
  /// LR side of the synthetic evaluation sequences (output side is L times
  /// this); clipped to what the images allow.
  int sequence_lr_size = 64;
  /// Pre-trained models, one per sigma in the same order; empty = train.
  std::vector<KernelModel> models;
  unsigned threads = 0;
  /// Single-threaded and timing-free, so reports are bitwise reproducible.
  bool deterministic = false;
};

struct BenchRow {
  double sigma = 0.0;
  double rmse_seq_nn = 0.0;       ///< held-out patterns
  double rmse_mlp_pnn = 0.0;      ///< held-out patterns
  double rmse_bilinear = 0.0;     ///< synthetic sequences vs HR truth
  double rmse_mlp_pnn_sequence = 0.0;
  double half_width = 0.0;        ///< HR pixels
  double wall_time_interp_ms = 0.0;
  double train_loss = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;     ///< ascending sigma
  std::vector<KernelModel> models;
  BenchOptions options;
  unsigned threads = 1;
};

/// Held-out RMSE of seq_nn and the MLP kernel over the same patterns.
struct PatternErrors {
  double seq_nn = 0.0;
  double mlp_pnn = 0.0;
};
PatternErrors evaluate_patterns(const KernelMlp& net, std::span<const TrainingPattern> data);

/// Seed of the held-out stream for a training seed; never equals it.
std::uint64_t heldout_seed(std::uint64_t train_seed);

BenchReport run_bench(const std::vector<Image>& images, const BenchOptions& options);

/// Aligned text table followed by "bench.<sigma>.<field>=<value>" lines and
/// the configuration echo. Timing lines are left out in deterministic mode.
std::string format_bench_report(const BenchReport& report);

}  // namespace pnnsr
