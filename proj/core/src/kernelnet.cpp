#include "pnnsr/kernelnet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pnnsr {

namespace {

/// tanh through one exp call; absolute error stays within a few 1e-16,
/// which is all the weighted sums downstream can resolve.
inline double activation(double x) {
  const double e = std::exp(-2.0 * std::abs(x));
  return std::copysign((1.0 - e) / (1.0 + e), x);
}

}  // namespace

KernelMlp::KernelMlp(int hidden_units) {
  if (hidden_units < 1) throw std::invalid_argument("kernel MLP needs at least one hidden unit");
  hidden.resize(static_cast<std::size_t>(hidden_units));
  output_weights.assign(static_cast<std::size_t>(hidden_units), 0.0);
}

std::vector<double> KernelMlp::parameters() const {
  std::vector<double> p;
  p.reserve(parameter_count());
  for (const auto& h : hidden) {
    p.push_back(h.weight);
    p.push_back(h.bias);
  }
  p.insert(p.end(), output_weights.begin(), output_weights.end());
  p.push_back(output_bias);
  return p;
}

void KernelMlp::set_parameters(std::span<const double> params) {
  if (params.size() != parameter_count()) {
    throw std::invalid_argument("expected " + std::to_string(parameter_count()) +
                                " MLP parameters, got " + std::to_string(params.size()));
  }
  std::size_t i = 0;
  for (auto& h : hidden) {
    h.weight = params[i++];
    h.bias = params[i++];
  }
  for (auto& w : output_weights) w = params[i++];
  output_bias = params[i];
}

KernelMlp KernelMlp::from_parameters(std::span<const double> params) {
  if (params.empty() || (params.size() - 1) % 3 != 0) {
    throw std::invalid_argument("parameter count " + std::to_string(params.size()) +
                                " is not 3H + 1");
  }
  KernelMlp net(static_cast<int>((params.size() - 1) / 3));
  net.set_parameters(params);
  return net;
}

double mlp_forward(const KernelMlp& net, double distance) {
  double y = net.output_bias;
  for (std::size_t i = 0; i < net.hidden.size(); ++i) {
    y += net.output_weights[i] * activation(net.hidden[i].weight * distance + net.hidden[i].bias);
  }
  return y;
}

MlpKernelTable::MlpKernelTable(const KernelMlp& net, double range, int steps_per_unit)
    : net_(net) {
  if (!(range > 0.0) || steps_per_unit < 1) {
    throw std::invalid_argument("kernel table needs a positive range and step count");
  }
  const auto n = static_cast<std::size_t>(std::ceil(range * steps_per_unit)) + 1;
  step_ = 1.0 / steps_per_unit;
  inv_step_ = static_cast<double>(steps_per_unit);
  value_.resize(n);
  slope_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double d = static_cast<double>(j) * step_;
    double y = net.output_bias;
    double dy = 0.0;
    for (std::size_t i = 0; i < net.hidden.size(); ++i) {
      const double h = activation(net.hidden[i].weight * d + net.hidden[i].bias);
      y += net.output_weights[i] * h;
      dy += net.output_weights[i] * net.hidden[i].weight * (1.0 - h * h);
    }
    value_[j] = y;
    slope_[j] = dy * step_;
  }
}

double MlpKernelTable::operator()(double distance) const {
  const double x = distance * inv_step_;
  if (!(x >= 0.0) || x >= static_cast<double>(value_.size() - 1)) {
    return mlp_forward(net_, distance);
  }
  const auto j = static_cast<std::size_t>(x);
  const double t = x - static_cast<double>(j);
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * value_[j] + h10 * slope_[j] + h01 * value_[j + 1] + h11 * slope_[j + 1];
}

Kernel tabulate_kernel(const Kernel& kernel, double range) {
  if (const auto* mlp = std::get_if<MlpKernel>(&kernel)) {
    return TabulatedMlpKernel{std::make_shared<const MlpKernelTable>(mlp->net, range)};
  }
  return kernel;
}

double kernel_weight(const Kernel& kernel, double distance) {
  return std::visit(
      [distance](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, MlpKernel>) {
          return mlp_forward(k.net, distance);
        } else if constexpr (std::is_same_v<K, ExponentialKernel>) {
          return std::exp(-distance / k.width);
        } else if constexpr (std::is_same_v<K, TabulatedMlpKernel>) {
          return (*k.table)(distance);
        } else {
          throw std::invalid_argument("nearest-only kernel has no distance profile");
        }
      },
      kernel);
}

namespace {

/// In-frame samples are used whenever any exist.
bool use_only_in_frame(std::span<const NeighborSample> samples) {
  bool any_in = false;
  bool any_out = false;
  for (const auto& s : samples) {
    (s.out_of_frame ? any_out : any_in) = true;
  }
  return any_in && any_out;
}

bool included(const NeighborSample& s, bool only_in_frame) {
  return !only_in_frame || !s.out_of_frame;
}

double nearest_value(std::span<const NeighborSample> samples, bool only_in_frame) {
  const NeighborSample* best = nullptr;
  for (const auto& s : samples) {
    if (!included(s, only_in_frame)) continue;
    if (best == nullptr || s.distance < best->distance) best = &s;
  }
  return best->value;
}

void check_nonempty(std::span<const NeighborSample> samples) {
  if (samples.empty()) throw std::invalid_argument("neighbor array is empty");
}

}  // namespace

CombineResult pnn_combine_detail(std::span<const NeighborSample> samples, const Kernel& kernel) {
  check_nonempty(samples);
  const bool only_in = use_only_in_frame(samples);
  if (std::holds_alternative<NearestOnlyKernel>(kernel)) {
    return {nearest_value(samples, only_in), false};
  }
  double num = 0.0;
  double den = 0.0;
  for (const auto& s : samples) {
    if (!included(s, only_in)) continue;
    const double y = kernel_weight(kernel, s.distance);
    num += s.value * y;
    den += y;
  }
  if (!(std::abs(den) >= kDegenerateWeightSum)) {
    return {nearest_value(samples, only_in), true};
  }
  return {num / den, false};
}

double pnn_combine(std::span<const NeighborSample> samples, const Kernel& kernel) {
  return pnn_combine_detail(samples, kernel).value;
}

double seq_nn(std::span<const NeighborSample> samples) {
  check_nonempty(samples);
  return nearest_value(samples, use_only_in_frame(samples));
}

std::optional<std::vector<double>> pnn_output_grad(std::span<const NeighborSample> samples,
                                                   std::span<const double> weights, double output,
                                                   double target) {
  check_nonempty(samples);
  if (weights.size() != samples.size()) {
    throw std::invalid_argument("weight count does not match sample count");
  }
  const bool only_in = use_only_in_frame(samples);
  double sum_y = 0.0;
  double sum_gy = 0.0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    if (!included(samples[s], only_in)) continue;
    sum_y += weights[s];
    sum_gy += samples[s].value * weights[s];
  }
  if (!(std::abs(sum_y) >= kDegenerateWeightSum)) return std::nullopt;

  std::vector<double> grad(samples.size(), 0.0);
  const double residual = output - target;
  const double inv_sq = 1.0 / (sum_y * sum_y);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    if (!included(samples[s], only_in)) continue;
    grad[s] = residual * (samples[s].value * sum_y - sum_gy) * inv_sq;
  }
  return grad;
}

double accumulate_backprop(const KernelMlp& net, const TrainingPattern& pattern,
                           std::span<double> grad, bool& skipped) {
  const auto& samples = pattern.samples;
  check_nonempty(samples);
  if (grad.size() != net.parameter_count()) {
    throw std::invalid_argument("gradient buffer has wrong length");
  }
  const std::size_t hidden = net.hidden.size();
  const bool only_in = use_only_in_frame(samples);

  // Hidden activations per sample, reused by the backward pass.
  thread_local std::vector<double> activations;
  thread_local std::vector<double> weights;
  activations.resize(samples.size() * hidden);
  weights.resize(samples.size());

  double sum_y = 0.0;
  double sum_gy = 0.0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    if (!included(samples[s], only_in)) continue;
    const double d = samples[s].distance;
    double* act = activations.data() + s * hidden;
    double y = net.output_bias;
    for (std::size_t i = 0; i < hidden; ++i) {
      act[i] = activation(net.hidden[i].weight * d + net.hidden[i].bias);
      y += net.output_weights[i] * act[i];
    }
    weights[s] = y;
    sum_y += y;
    sum_gy += samples[s].value * y;
  }

  if (!(std::abs(sum_y) >= kDegenerateWeightSum)) {
    skipped = true;
    const double e = nearest_value(samples, only_in) - pattern.target;
    return 0.5 * e * e;
  }
  skipped = false;
  const double output = sum_gy / sum_y;
  const double residual = output - pattern.target;
  const double inv_sq = 1.0 / (sum_y * sum_y);

  double* g_hidden = grad.data();
  double* g_out = grad.data() + 2 * hidden;
  double& g_bias = grad[3 * hidden];
  for (std::size_t s = 0; s < samples.size(); ++s) {
    if (!included(samples[s], only_in)) continue;
    const double delta = residual * (samples[s].value * sum_y - sum_gy) * inv_sq;
    const double d = samples[s].distance;
    const double* act = activations.data() + s * hidden;
    g_bias += delta;
    for (std::size_t i = 0; i < hidden; ++i) {
      g_out[i] += delta * act[i];
      const double pre = delta * net.output_weights[i] * (1.0 - act[i] * act[i]);
      g_hidden[2 * i] += pre * d;
      g_hidden[2 * i + 1] += pre;
    }
  }
  return 0.5 * residual * residual;
}

BackpropResult mlp_backprop(const KernelMlp& net, const TrainingPattern& pattern) {
  BackpropResult r;
  r.grad.assign(net.parameter_count(), 0.0);
  r.loss = accumulate_backprop(net, pattern, r.grad, r.skipped);
  return r;
}

double kernel_half_width(const Kernel& kernel, double max_distance) {
  if (std::holds_alternative<NearestOnlyKernel>(kernel)) {
    throw KernelWidthError("nearest-only kernel has no width");
  }
  if (!(max_distance > 0.0)) throw std::invalid_argument("max distance must be positive");
  const double k0 = kernel_weight(kernel, 0.0);
  if (std::abs(k0) < 1e-9) {
    throw KernelWidthError("kernel width undefined: kernel(0) is zero");
  }
  const double half = 0.5 * k0;
  auto crossed = [&](double d) { return kernel_weight(kernel, d) <= half; };
  if (crossed(0.0)) return 0.0;

  constexpr double kScanStep = 1e-3;
  double lo = 0.0;
  for (long i = 1;; ++i) {
    const double d = std::min(max_distance, static_cast<double>(i) * kScanStep);
    if (crossed(d)) {
      double hi = d;
      while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        (crossed(mid) ? hi : lo) = mid;
      }
      return hi;
    }
    if (d >= max_distance) return max_distance;
    lo = d;
  }
}

}  // namespace pnnsr
