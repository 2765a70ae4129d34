#include <cmath>
#include <random>

#include "doctest.h"
#include "pnnsr/training.hpp"
#include "support/gradcheck.hpp"
#include "support/test_images.hpp"

using namespace pnnsr;
using namespace pnnsr::testing;

namespace {

/// Upper 1% point of chi-square with k degrees of freedom (Wilson-Hilferty).
double chi2_critical_99(int k) {
  const double z = 2.3263478740408408;
  const double a = 2.0 / (9.0 * k);
  return k * std::pow(1.0 - a + z * std::sqrt(a), 3.0);
}

/// Area average of the bilinear surface over the L x L footprint, by dense
/// supersampling with 33 x 33 midpoints.
double dense_area_average(const Image& img, Point2 center, int L) {
  constexpr int kSub = 33;
  double sum = 0.0;
  for (int j = 0; j < kSub; ++j)
    for (int i = 0; i < kSub; ++i) {
      const double fx = center.x - 0.5 * L + L * (i + 0.5) / kSub;
      const double fy = center.y - 0.5 * L + L * (j + 0.5) / kSub;
      sum += sample_bilinear(img, {fx, fy});
    }
  return sum / (kSub * kSub);
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.frames = 8;
  cfg.patterns = 400;
  cfg.restarts = 3;
  cfg.cg_max_iters = 30;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("target sampling") {
  SUBCASE("constant image is uniform over the interior") {
    const int L = 3;
    const double radius = 1.5;
    const int margin = static_cast<int>(std::ceil(L * (radius + 1.0)));
    const int side = 16 + 2 * margin;
    const Image img(side, side, 100.0);
    const TargetSampler sampler(img, L, radius);
    CHECK(sampler.margin() == margin);
    Rng rng(1);
    std::vector<int> counts(256, 0);
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
      const Point2 p = sampler.sample(rng);
      const int x = static_cast<int>(std::floor(p.x + 0.5)) - margin;
      const int y = static_cast<int>(std::floor(p.y + 0.5)) - margin;
      REQUIRE(x >= 0);
      REQUIRE(x < 16);
      REQUIRE(y >= 0);
      REQUIRE(y < 16);
      ++counts[y * 16 + x];
    }
    const double expected = draws / 256.0;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < chi2_critical_99(255));
  }
  SUBCASE("a step edge attracts the draws") {
    const Image img = vertical_step(64, 64, 32, 100.0);
    const TargetSampler sampler(img, 3, 1.5);
    Rng rng(77);
    int near = 0;
    for (int i = 0; i < 10000; ++i) {
      const Point2 p = sampler.sample(rng);
      if (std::abs(p.x - 31.5) <= 3.0) ++near;
    }
    CHECK(near >= 8000);
  }
  SUBCASE("same seed gives the same draws") {
    const Image img = smooth_texture(48, 48, 3);
    Rng a(9), b(9);
    for (int i = 0; i < 100; ++i) {
      const Point2 p = sample_target_location(img, 3, 1.5, a);
      const Point2 q = sample_target_location(img, 3, 1.5, b);
      CHECK(p.x == q.x);
      CHECK(p.y == q.y);
    }
  }
  SUBCASE("too small an image names the minimum") {
    try {
      TargetSampler(Image(10, 40, 1.0), 3, 1.5);
      FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("17x17") != std::string::npos);
    }
    CHECK(minimum_training_image_side(3, 1.5) == 17);
  }
}

TEST_CASE("synth_lowres_pixel") {
  CHECK(synth_lowres_pixel(Image(9, 9, 33.0), {4.2, 3.9}, 3) == doctest::Approx(33.0));
  CHECK(synth_lowres_pixel(ramp_x(12, 12), {5.3, 6.0}, 3) == doctest::Approx(5.3));
  CHECK(synth_lowres_pixel(ramp_x(12, 12), {5.3, 6.0}, 1) == doctest::Approx(5.3));

  SUBCASE("matches dense supersampling on a random texture") {
    const Image img = smooth_texture(40, 40, 8, 4.0);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> c(2.0, 37.0);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const Point2 p{c(rng), c(rng)};
      worst = std::max(worst, std::abs(synth_lowres_pixel(img, p, 3) - dense_area_average(img, p, 3)));
    }
    CHECK(worst < 0.5);
  }
  CHECK_THROWS_AS(synth_lowres_pixel(Image(9, 9), {0.5, 4.0}, 3), std::invalid_argument);
  CHECK_THROWS_AS(synth_lowres_pixel(Image(9, 9), {4.0, 7.6}, 3), std::invalid_argument);
}

TEST_CASE("make_pattern") {
  const Image img = smooth_texture(64, 64, 12);
  TrainConfig cfg;

  SUBCASE("co-located noiseless samples equal the target") {
    const std::vector<Point2> zeros(static_cast<std::size_t>(cfg.frames), Point2{0.0, 0.0});
    Rng rng(1);
    const auto p = make_pattern_at(img, cfg, {30.2, 29.7}, zeros, rng);
    REQUIRE(p.samples.size() == 25);
    for (const auto& s : p.samples) {
      CHECK(s.value == p.target);
      CHECK(s.distance == 0.0);
    }
  }
  SUBCASE("constant image gives constant values") {
    Rng rng(3);
    const auto p = make_pattern(Image(40, 40, 71.0), cfg, rng);
    CHECK(p.target == doctest::Approx(71.0));
    for (const auto& s : p.samples) {
      CHECK(s.value == doctest::Approx(71.0));
      CHECK(s.distance <= cfg.scatter_radius * cfg.scale + 1e-12);
    }
  }
  SUBCASE("noise enters the inputs with the configured deviation") {
    cfg.sigma = 10.0;
    TrainConfig clean = cfg;
    clean.sigma = 0.0;
    const TargetSampler sampler(img, cfg.scale, cfg.scatter_radius);
    Rng rng(10);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double sum = 0.0, sum_sq = 0.0;
    long n = 0;
    for (int k = 0; k < 10000; ++k) {
      const Point2 at = sampler.sample(rng);
      std::vector<Point2> offsets(4);
      for (auto& o : offsets) o = {unit(rng) - 0.5, unit(rng) - 0.5};
      Rng unused(0);
      const auto noisy = make_pattern_at(img, cfg, at, offsets, rng);
      const auto exact = make_pattern_at(img, clean, at, offsets, unused);
      CHECK(noisy.target == exact.target);
      for (std::size_t s = 0; s < offsets.size(); ++s) {
        const double d = noisy.samples[s].value - exact.samples[s].value;
        sum += d;
        sum_sq += d * d;
        ++n;
      }
    }
    const double mean = sum / n;
    const double sd = std::sqrt((sum_sq - n * mean * mean) / (n - 1));
    CHECK(sd == doctest::Approx(10.0).epsilon(0.05));
  }
}

TEST_CASE("make_dataset") {
  const auto images = training_set(64);
  TrainConfig cfg;
  cfg.patterns = 4;
  cfg.sigma = 0.0;

  SUBCASE("round robin over the images") {
    cfg.frames = 1;
    const auto data = make_dataset(images, cfg);
    REQUIRE(data.size() == 4);
    // Regenerate each pattern by hand from the shared stream.
    Rng rng(cfg.seed);
    for (std::size_t k = 0; k < 4; ++k) {
      const auto p = make_pattern(images[k], TargetSampler(images[k], 3, 1.5), cfg, rng);
      CHECK(p.target == data[k].target);
      CHECK(p.samples[0] == data[k].samples[0]);
    }
  }
  SUBCASE("deterministic") {
    cfg.patterns = 50;
    cfg.sigma = 5.0;
    const auto a = make_dataset(images, cfg);
    const auto b = make_dataset(images, cfg);
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k].target == b[k].target);
      CHECK(a[k].samples == b[k].samples);
    }
  }
  SUBCASE("targets stay inside the source intensity range") {
    cfg.patterns = 10000;
    cfg.frames = 2;
    double lo = 1e300, hi = -1e300;
    for (const auto& img : images)
      for (double v : img.data()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    int outside = 0;
    for (const auto& p : make_dataset(images, cfg)) outside += (p.target < lo || p.target > hi);
    CHECK(outside == 0);
  }
}

TEST_CASE("batch loss") {
  SUBCASE("perfect predictor") {
    std::vector<TrainingPattern> data;
    for (int k = 0; k < 5; ++k) data.push_back({NeighborArray(3, {10.0 + k, 0.0, false}), 10.0 + k});
    KernelMlp net;
    net.output_bias = 1.0;
    CHECK(batch_loss(net, data) == 0.0);
  }
  SUBCASE("single pattern with error 2") {
    const std::vector<TrainingPattern> data{{NeighborArray(2, {7.0, 1.0, false}), 5.0}};
    KernelMlp net;
    net.output_bias = 0.3;
    CHECK(batch_loss(net, data) == doctest::Approx(2.0).epsilon(1e-14));
  }
  SUBCASE("matches a pattern-by-pattern oracle") {
    std::mt19937_64 rng(19);
    const KernelMlp net = random_net(rng);
    std::vector<TrainingPattern> data;
    for (int k = 0; k < 700; ++k) data.push_back(random_pattern(rng, 25));
    long double oracle = 0.0L;
    for (const auto& p : data) oracle += pattern_loss(net, p);
    oracle /= data.size();
    CHECK(batch_loss(net, data) == doctest::Approx(static_cast<double>(oracle)).epsilon(1e-9));
    const auto bg = batch_gradient(net, data);
    CHECK(bg.loss == doctest::Approx(static_cast<double>(oracle)).epsilon(1e-9));
    CHECK(bg.skipped == 0);

    std::vector<double> summed(76, 0.0);
    for (const auto& p : data) {
      const auto r = mlp_backprop(net, p);
      for (std::size_t i = 0; i < 76; ++i) summed[i] += r.grad[i];
    }
    for (std::size_t i = 0; i < 76; ++i)
      CHECK(bg.grad[i] == doctest::Approx(summed[i] / data.size()).epsilon(1e-9));
  }
}

TEST_CASE("initial network") {
  Rng rng(4);
  const KernelMlp net = initial_network(25, rng);
  CHECK(net.output_bias == 1.0);
  for (const auto& h : net.hidden) {
    CHECK(std::abs(h.weight) <= 1.0);
    CHECK(std::abs(h.bias) <= 1.0);
  }
  for (double w : net.output_weights) CHECK(std::abs(w) <= 0.1);
}

TEST_CASE("train") {
  const auto images = training_set(64);
  const TrainConfig cfg = small_config();
  const auto data = make_dataset(images, cfg);

  const auto a = train(data, cfg);
  REQUIRE(a.report.restarts.size() == 3);
  for (const auto& r : a.report.restarts) {
    CHECK_FALSE(r.diverged);
    CHECK(r.final_loss <= r.initial_loss);
    CHECK(r.curve.size() == static_cast<std::size_t>(r.iterations) + 1);
  }
  for (const auto& r : a.report.restarts) CHECK(a.final_loss <= r.final_loss);
  CHECK(a.final_loss == doctest::Approx(batch_loss(a.net, data)).epsilon(1e-12));

  SUBCASE("bitwise deterministic across runs and worker counts") {
    TrainConfig threaded = cfg;
    threaded.threads = 3;
    const auto b = train(data, threaded);
    CHECK(b.net == a.net);
    CHECK(b.final_loss == a.final_loss);
    CHECK(b.report.selected == a.report.selected);
  }
  SUBCASE("config validation") {
    TrainConfig bad = cfg;
    bad.restarts = 0;
    CHECK_THROWS_AS(train(data, bad), std::invalid_argument);
  }
}
