#include "pnnsr/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pnnsr/error.hpp"

namespace pnnsr {

namespace {

constexpr int kConjugateBacktracks = 20;

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

/// Minimizer of the cubic matching phi(0) = f0, phi'(0) = s0, phi(a) = fa and
/// phi'(a) = sa, clipped to at most 4a. Returns 0 when there is none or it
/// lies below 0.1a, where the cubic model is not trusted.
double cubic_minimizer(double f0, double s0, double a, double fa, double sa) {
  const double d1 = s0 + sa - 3.0 * (f0 - fa) / (0.0 - a);
  const double disc = d1 * d1 - s0 * sa;
  if (!(disc >= 0.0)) return 0.0;
  const double d2 = std::sqrt(disc);
  const double denom = sa - s0 + 2.0 * d2;
  if (!(std::abs(denom) > 0.0)) return 0.0;
  const double alpha = a - a * (sa + d2 - d1) / denom;
  if (!std::isfinite(alpha) || alpha < 0.1 * a) return 0.0;
  return std::min(alpha, 4.0 * a);
}

}  // namespace

CgResult minimize_cg(const Objective& objective, std::vector<double> x0, const CgOptions& options) {
  const std::size_t n = x0.size();
  const int restart_every = options.restart_every > 0 ? options.restart_every : static_cast<int>(n);

  CgResult result;
  std::vector<double> x = std::move(x0);
  std::vector<double> g(n);
  double f = objective(x, g);
  ++result.evaluations;
  if (!std::isfinite(f)) throw Error("objective is not finite at the starting point");
  result.curve.push_back(f);

  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
  std::vector<double> x_new(n);
  std::vector<double> g_new(n);
  std::vector<double> x_try(n);
  std::vector<double> g_try(n);

  double prev_step = 0.0;
  double prev_slope = 0.0;
  int since_restart = 0;
  result.stop_reason = "max_iters";

  for (int k = 0; k < options.max_iters; ++k) {
    const double gnorm = std::sqrt(dot(g, g));
    if (gnorm <= options.grad_tol) {
      result.stop_reason = "grad_tol";
      break;
    }
    double slope = dot(g, d);
    bool steepest = since_restart == 0;
    if (!(slope < 0.0)) {
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      slope = -gnorm * gnorm;
      steepest = true;
      since_restart = 0;
    }

    // Initial trial step: the larger of two standard guesses, a quadratic
    // through f, the slope and last iteration's decrease, and the previous
    // step rescaled to the same first-order change. A unit-length move starts
    // the very first iteration.
    const std::size_t accepted_count = result.curve.size();
    const double decrease =
        accepted_count >= 2 ? result.curve[accepted_count - 2] - f : 0.0;
    double step = 1.0 / std::sqrt(dot(d, d));
    if (prev_step > 0.0) {
      step = std::max(2.02 * decrease / -slope, 2.0 * prev_step * prev_slope / slope);
    }
    step = std::min(step, 1e10);

    bool accepted = false;
    double f_new = f;
    auto evaluate = [&](double alpha, std::vector<double>& xs, std::vector<double>& gs) {
      for (std::size_t i = 0; i < n; ++i) xs[i] = x[i] + alpha * d[i];
      ++result.evaluations;
      return objective(xs, gs);
    };
    // Strict decrease as well: once c * alpha * slope drops below the
    // rounding of f, the Armijo test alone would accept a step that does
    // not move.
    auto armijo = [&](double value, double alpha) {
      return std::isfinite(value) && value < f && value <= f + options.armijo_c * alpha * slope;
    };
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      // A conjugate direction that needs many halvings is heading into a
      // wall; giving up early hands over to steepest descent at full length.
      const int backtracks =
          steepest ? options.max_backtracks : std::min(options.max_backtracks, kConjugateBacktracks);
      for (int j = 0; j < backtracks; ++j) {
        f_new = evaluate(step, x_new, g_new);
        if (j == 0 && std::isfinite(f_new)) {
          // One cubic refinement of the first trial step from the two
          // endpoint values and slopes; kept only if it is the better
          // Armijo point.
          const double alpha = cubic_minimizer(f, slope, step, f_new, dot(g_new, d));
          if (alpha > 0.0 && std::abs(alpha - step) > 1e-3 * step) {
            const double f_try = evaluate(alpha, x_try, g_try);
            if (armijo(f_try, alpha) && !(armijo(f_new, step) && f_new <= f_try)) {
              step = alpha;
              f_new = f_try;
              x_new.swap(x_try);
              g_new.swap(g_try);
            }
          }
        }
        if (armijo(f_new, step)) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (accepted || steepest) break;
      // The conjugate direction failed; retry along steepest descent.
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      slope = -gnorm * gnorm;
      steepest = true;
      since_restart = 0;
      step = 1.0 / gnorm;
    }
    if (!accepted) {
      result.stop_reason = "line_search";
      break;
    }

    // PR+ update.
    const double gg = dot(g, g);
    double beta = 0.0;
    for (std::size_t i = 0; i < n; ++i) beta += g_new[i] * (g_new[i] - g[i]);
    beta = std::max(0.0, beta / gg);
    ++since_restart;
    if (since_restart >= restart_every) {
      beta = 0.0;
      since_restart = 0;
    }
    for (std::size_t i = 0; i < n; ++i) d[i] = -g_new[i] + beta * d[i];

    prev_step = step;
    prev_slope = slope;
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    result.curve.push_back(f);
    result.iterations = k + 1;

    const int w = options.tol_window;
    const auto m = result.curve.size();
    if (options.rel_tol > 0.0 && w > 0 && m > static_cast<std::size_t>(w)) {
      const double before = result.curve[m - 1 - w];
      const double scale = std::max(std::abs(before), 1e-300);
      if ((before - f) / scale < options.rel_tol) {
        result.stop_reason = "rel_tol";
        break;
      }
    }
  }

  result.grad_norm = std::sqrt(dot(g, g));
  if (result.stop_reason == "max_iters" && result.grad_norm <= options.grad_tol) {
    result.stop_reason = "grad_tol";
  }
  result.value = f;
  result.x = std::move(x);
  return result;
}

}  // namespace pnnsr
