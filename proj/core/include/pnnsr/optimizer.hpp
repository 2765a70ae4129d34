#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pnnsr {

/// Returns f(x) and writes the gradient into `grad` (same length as x).
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct CgOptions {
  int max_iters = 500;
  /// Stop when (f[k - window] - f[k]) / |f[k - window]| < rel_tol.
  double rel_tol = 1e-6;
  int tol_window = 5;
  /// Stop when ||grad|| <= grad_tol (0 disables).
  double grad_tol = 0.0;
  /// Steepest-descent restart period; 0 means the problem dimension.
  int restart_every = 0;
  double armijo_c = 1e-4;
  int max_backtracks = 60;
};

struct CgResult {
  std::vector<double> x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  /// Objective after every accepted iterate, starting with f(x0).
  std::vector<double> curve;
  std::string stop_reason;
};

/// Polak-Ribiere (PR+) nonlinear conjugate gradients with Armijo backtracking
/// (step halving). Falls back to steepest descent on a non-descent direction
/// or every `restart_every` iterations. Throws pnnsr::Error if f(x0) is not
/// finite.
CgResult minimize_cg(const Objective& objective, std::vector<double> x0, const CgOptions& options);

}  // namespace pnnsr
