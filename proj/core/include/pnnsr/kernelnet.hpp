#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "pnnsr/error.hpp"
#include "pnnsr/projection.hpp"

namespace pnnsr {

inline constexpr int kDefaultHiddenUnits = 25;

/// Denominators with |sum y| below this fall back to the nearest sample.
inline constexpr double kDegenerateWeightSum = 1e-9;

struct HiddenUnit {
  double weight = 0.0;
  double bias = 0.0;
  friend bool operator==(const HiddenUnit&, const HiddenUnit&) = default;
};

/// Distance -> weight perceptron: one tanh hidden layer, linear output.
///   y(d) = output_bias + sum_i output_weights[i] * tanh(w_i d + b_i)
/// Flat parameter order: (w_0, b_0, ..., w_{H-1}, b_{H-1}), output weights,
/// output bias; 76 values for H = 25.
struct KernelMlp {
  std::vector<HiddenUnit> hidden;
  std::vector<double> output_weights;
  double output_bias = 0.0;

  explicit KernelMlp(int hidden_units = kDefaultHiddenUnits);

  int hidden_units() const { return static_cast<int>(hidden.size()); }
  std::size_t parameter_count() const { return 3 * hidden.size() + 1; }

  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> params);
  static KernelMlp from_parameters(std::span<const double> params);

  friend bool operator==(const KernelMlp&, const KernelMlp&) = default;
};

double mlp_forward(const KernelMlp& net, double distance);

struct MlpKernel {
  KernelMlp net;
};

/// weight = exp(-d / width)
struct ExponentialKernel {
  double width = 1.0;
};

/// Weight 1 for the closest sample (lowest frame index on ties), 0 otherwise.
struct NearestOnlyKernel {};

/// MLP profile sampled on a uniform grid over [0, range] and evaluated by
/// cubic Hermite interpolation with exact slopes. Distances past the range
/// are evaluated exactly. Interpolation error is below 1e-9 for weights of
/// moderate magnitude.
class MlpKernelTable {
 public:
  MlpKernelTable(const KernelMlp& net, double range, int steps_per_unit = 512);

  double operator()(double distance) const;
  const KernelMlp& net() const { return net_; }

 private:
  KernelMlp net_;
  double step_;
  double inv_step_;
  std::vector<double> value_;
  std::vector<double> slope_;  // dy/dd scaled by step_
};

struct TabulatedMlpKernel {
  std::shared_ptr<const MlpKernelTable> table;
};

using Kernel = std::variant<MlpKernel, ExponentialKernel, NearestOnlyKernel, TabulatedMlpKernel>;

/// Replaces an MlpKernel with a tabulated one covering [0, range]; other
/// kernels are returned unchanged.
Kernel tabulate_kernel(const Kernel& kernel, double range);

/// Kernel weight at a distance. NearestOnlyKernel has no distance profile and
/// throws std::invalid_argument.
double kernel_weight(const Kernel& kernel, double distance);

struct TrainingPattern {
  NeighborArray samples;
  double target = 0.0;
};

struct CombineResult {
  double value = 0.0;
  /// The weight sum fell below kDegenerateWeightSum and the nearest sample's
  /// value was returned instead.
  bool degenerate = false;
};

/// Normalized weighted average sum g_s y_s / sum y_s. Out-of-frame samples
/// are dropped whenever at least one in-frame sample exists.
CombineResult pnn_combine_detail(std::span<const NeighborSample> samples, const Kernel& kernel);
double pnn_combine(std::span<const NeighborSample> samples, const Kernel& kernel);

/// Value of the closest sample over the same effective set pnn_combine uses;
/// ties go to the lowest frame index.
double seq_nn(std::span<const NeighborSample> samples);

/// dE/dy_s = (o - t) (g_s sum y - sum g y) / (sum y)^2 for each sample, zero
/// for dropped samples. Returns nullopt when the pattern hits the degenerate
/// weight-sum guard and must be skipped.
std::optional<std::vector<double>> pnn_output_grad(std::span<const NeighborSample> samples,
                                                   std::span<const double> weights, double output,
                                                   double target);

struct BackpropResult {
  double loss = 0.0;
  std::vector<double> grad;
  bool skipped = false;
};

/// Loss 1/2 (o - t)^2 and its gradient with respect to every shared MLP
/// parameter, summed over the pattern's samples.
BackpropResult mlp_backprop(const KernelMlp& net, const TrainingPattern& pattern);

/// Allocation-light variant for training loops: adds the pattern gradient to
/// `grad` and returns the loss. `skipped` is set when the guard triggers.
double accumulate_backprop(const KernelMlp& net, const TrainingPattern& pattern,
                           std::span<double> grad, bool& skipped);

class KernelWidthError : public Error {
 public:
  using Error::Error;
};

/// Smallest d in [0, max_distance] with kernel(d) <= kernel(0) / 2, located
/// by a 1e-3 scan refined by bisection to 1e-6. Returns max_distance if the
/// kernel never crosses. Throws KernelWidthError when kernel(0) is ~0 or the
/// kernel has no distance profile.
double kernel_half_width(const Kernel& kernel, double max_distance);

}  // namespace pnnsr
