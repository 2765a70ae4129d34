#include <cmath>
#include <random>

#include "doctest.h"
#include "pnnsr/restoration.hpp"
#include "support/test_images.hpp"

using namespace pnnsr;
using namespace pnnsr::testing;

namespace {

Image shift_x(const Image& img, int by) {
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.at(x, y) = img.clamped(x - by, y);
  return out;
}

Image box3(const Image& img) {
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      double s = 0.0;
      for (int j = -1; j <= 1; ++j)
        for (int i = -1; i <= 1; ++i) s += img.clamped(x + i, y + j);
      out.at(x, y) = s / 9.0;
    }
  return out;
}

/// Coefficient at offset (di, dj) from the filter center.
double tap(const FirFilter& f, int di, int dj) { return f.at(f.radius() + di, f.radius() + dj); }

void check_single_tap(const FirFilter& f, int di, int dj) {
  for (int j = -f.radius(); j <= f.radius(); ++j)
    for (int i = -f.radius(); i <= f.radius(); ++i) {
      const double want = (i == di && j == dj) ? 1.0 : 0.0;
      CHECK(std::abs(tap(f, i, j) - want) < 1e-6);
    }
}

FirFilter random_filter(int size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FirFilter f;
  f.size = size;
  f.coeffs.resize(static_cast<std::size_t>(size) * size);
  for (double& c : f.coeffs) c = u(rng);
  return f;
}

}  // namespace

TEST_CASE("design_filter") {
  const Image target = smooth_texture(48, 48, 3, 1.0);

  SUBCASE("identical pair gives a delta") {
    const std::vector<ImagePair> pairs{{target, target}};
    const FirFilter f = design_filter(pairs, 5);
    CHECK(f.size == 5);
    check_single_tap(f, 0, 0);
  }
  SUBCASE("shifted pairs give an offset delta") {
    // With correlation, out(x) = sum c_i d(x + i - r). A degraded image that
    // lags the target by one pixel, d(x) = t(x - 1), is undone by the tap at
    // +1; one that leads it, d(x) = t(x + 1), by the tap at -1.
    const std::vector<ImagePair> lag{{shift_x(target, 1), target}};
    check_single_tap(design_filter(lag, 3), +1, 0);
    const std::vector<ImagePair> lead{{shift_x(target, -1), target}};
    check_single_tap(design_filter(lead, 3), -1, 0);
  }
  SUBCASE("restores a box blur on a held-out pair") {
    std::vector<ImagePair> train;
    for (int s = 0; s < 3; ++s) {
      const Image t = fractal_texture(64, 64, 100 + s);
      train.push_back({box3(t), t});
    }
    const FirFilter f = design_filter(train, 7);
    const Image held = fractal_texture(64, 64, 999);
    const Image blurred = box3(held);
    CHECK(rmse(apply_filter(blurred, f), held) < rmse(blurred, held));
  }
  SUBCASE("objective is non-increasing in the support size") {
    const Image t = fractal_texture(48, 48, 4);
    const std::vector<ImagePair> pairs{{add_gaussian_noise(box3(t), 2.0, 1), t}};
    double prev = design_objective(pairs, design_filter(pairs, 1));
    for (int k = 3; k <= 9; k += 2) {
      const double obj = design_objective(pairs, design_filter(pairs, k));
      CHECK(obj <= prev * (1.0 + 1e-9));
      prev = obj;
    }
  }
  CHECK_THROWS_AS(design_filter(std::vector<ImagePair>{}, 3), std::invalid_argument);
  CHECK_THROWS_AS(design_filter(std::vector<ImagePair>{{target, target}}, 4),
                  std::invalid_argument);
  CHECK_THROWS_AS(design_filter(std::vector<ImagePair>{{Image(2, 2), Image(2, 2)}}, 5),
                  FilterDesignError);
}

TEST_CASE("apply_filter") {
  const Image img = uniform_noise(23, 17, 6);
  CHECK(apply_filter(img, FirFilter::delta(5)) == img);

  FirFilter mean3;
  mean3.size = 3;
  mean3.coeffs.assign(9, 1.0 / 9.0);
  const Image flat = apply_filter(Image(8, 8, 77.0), mean3);
  for (double v : flat.data()) CHECK(v == doctest::Approx(77.0));

  SUBCASE("matches a quadruple-loop oracle") {
    const FirFilter f = random_filter(5, 2);
    const Image out = apply_filter(img, f);
    double worst = 0.0;
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        double acc = 0.0;
        for (int j = 0; j < 5; ++j)
          for (int i = 0; i < 5; ++i) {
            const int sx = std::clamp(x + i - 2, 0, img.width() - 1);
            const int sy = std::clamp(y + j - 2, 0, img.height() - 1);
            acc += f.coeffs[j * 5 + i] * img.data()[sy * img.width() + sx];
          }
        worst = std::max(worst, std::abs(out.at(x, y) - acc) / std::max(1.0, std::abs(acc)));
      }
    CHECK(worst < 1e-9);
  }
  SUBCASE("linear") {
    const Image other = uniform_noise(23, 17, 7);
    const FirFilter f = random_filter(3, 3);
    Image mix(23, 17);
    for (std::size_t i = 0; i < mix.size(); ++i)
      mix.data()[i] = 2.5 * img.data()[i] - 0.75 * other.data()[i];
    const Image a = apply_filter(mix, f), b = apply_filter(img, f), c = apply_filter(other, f);
    for (int y = 1; y < 16; ++y)
      for (int x = 1; x < 22; ++x)
        CHECK(a.at(x, y) == doctest::Approx(2.5 * b.at(x, y) - 0.75 * c.at(x, y)).epsilon(1e-9));
  }
  SUBCASE("thread count does not change the result") {
    const FirFilter f = random_filter(7, 9);
    CHECK(apply_filter(img, f, 1) == apply_filter(img, f, 4));
  }
}

TEST_CASE("filter text format") {
  FirFilter f = random_filter(3, 12);
  f.noise_sigma = 5.0;
  const FirFilter g = parse_filter(format_filter(f));
  CHECK(g.size == 3);
  CHECK(g.coeffs == f.coeffs);
  CHECK(g.noise_sigma == 5.0);

  CHECK(parse_filter("FIRF 1\nsize=1 noise_sigma=0\n1\n").coeffs == std::vector<double>{1.0});
  CHECK_THROWS_AS(parse_filter("FIRF 2\nsize=1 noise_sigma=0\n1\n"), FormatError);
  CHECK_THROWS_AS(parse_filter("FIRF 1\nsize=3 noise_sigma=0\n1 2 3\n"), FormatError);
  CHECK_THROWS_AS(parse_filter("FIRF 1\nsize=1 noise_sigma=0 orientation=convolution\n1\n"),
                  FormatError);
}
