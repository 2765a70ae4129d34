#pragma once

// Random instances and central-difference oracles for the kernel network
// gradients. Shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "pnnsr/kernelnet.hpp"

namespace pnnsr::testing {

/// Relative error with a floor so components that are zero up to rounding
/// are compared absolutely.
inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Network whose weights stay comfortably away from a zero weight sum.
inline KernelMlp random_net(std::mt19937_64& rng, int hidden = kDefaultHiddenUnits) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), ow(-0.5, 0.5), bias(0.5, 1.5);
  KernelMlp net(hidden);
  for (auto& h : net.hidden) {
    h.weight = u(rng);
    h.bias = u(rng);
  }
  for (double& w : net.output_weights) w = ow(rng);
  net.output_bias = bias(rng);
  return net;
}

/// Pattern with unit-magnitude values and distances.
inline TrainingPattern random_pattern(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> value(0.0, 1.0), dist(0.0, 3.0);
  TrainingPattern p;
  for (int s = 0; s < n; ++s) p.samples.push_back({value(rng), dist(rng), false});
  p.target = value(rng);
  return p;
}

inline double pattern_loss(const KernelMlp& net, const TrainingPattern& p) {
  const double o = pnn_combine(p.samples, MlpKernel{net});
  return 0.5 * (o - p.target) * (o - p.target);
}

/// Central differences of the pattern loss over every flat MLP parameter.
inline std::vector<double> numeric_parameter_gradient(const KernelMlp& net,
                                                      const TrainingPattern& p,
                                                      double step = 1e-5) {
  const std::vector<double> x = net.parameters();
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    grad[i] = (pattern_loss(KernelMlp::from_parameters(xp), p) -
               pattern_loss(KernelMlp::from_parameters(xm), p)) /
              (2.0 * step);
  }
  return grad;
}

/// Loss 1/2 (sum g y / sum y - t)^2 as a function of the raw weights,
/// accumulated in long double so central differences are not swamped by
/// rounding when intensities are large.
inline long double weight_loss(const std::vector<NeighborSample>& samples,
                               const std::vector<long double>& y, double target) {
  long double num = 0.0L, den = 0.0L;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    num += samples[s].value * y[s];
    den += y[s];
  }
  const long double e = num / den - target;
  return 0.5L * e * e;
}

inline std::vector<double> numeric_weight_gradient(const std::vector<NeighborSample>& samples,
                                                   const std::vector<double>& y, double target,
                                                   double step = 1e-6) {
  const std::vector<long double> base(y.begin(), y.end());
  std::vector<double> grad(y.size());
  for (std::size_t s = 0; s < y.size(); ++s) {
    std::vector<long double> yp = base, ym = base;
    yp[s] += step;
    ym[s] -= step;
    grad[s] = static_cast<double>((weight_loss(samples, yp, target) - weight_loss(samples, ym, target)) /
                                  (yp[s] - ym[s]));
  }
  return grad;
}

}  // namespace pnnsr::testing
