#include "pnnsr/image.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace pnnsr {

Image::Image(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("image dimensions must be positive, got " + std::to_string(width) +
                                "x" + std::to_string(height));
  }
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

Image::Image(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("image dimensions must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("image data length " + std::to_string(data_.size()) +
                                " does not match " + std::to_string(width) + "x" +
                                std::to_string(height));
  }
}

double Image::clamped(int x, int y) const {
  return at(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
}

double sample_bilinear(const Image& img, Point2 p) {
  const double x = std::clamp(p.x, 0.0, static_cast<double>(img.width() - 1));
  const double y = std::clamp(p.y, 0.0, static_cast<double>(img.height() - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * img.at(x0, y0) + fx * img.at(x1, y0);
  const double bottom = (1.0 - fx) * img.at(x0, y1) + fx * img.at(x1, y1);
  return (1.0 - fy) * top + fy * bottom;
}

namespace {

double derivative(const Image& img, int x, int y, bool horizontal) {
  const int n = horizontal ? img.width() : img.height();
  const int i = horizontal ? x : y;
  if (n == 1) return 0.0;
  auto value = [&](int k) { return horizontal ? img.at(k, y) : img.at(x, k); };
  if (i == 0) return value(1) - value(0);
  if (i == n - 1) return value(n - 1) - value(n - 2);
  return 0.5 * (value(i + 1) - value(i - 1));
}

}  // namespace

Image gradient_x(const Image& img) {
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.at(x, y) = derivative(img, x, y, true);
  return out;
}

Image gradient_y(const Image& img) {
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.at(x, y) = derivative(img, x, y, false);
  return out;
}

Image gradient_magnitude(const Image& img) {
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double gx = derivative(img, x, y, true);
      const double gy = derivative(img, x, y, false);
      out.at(x, y) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return out;
}

Image add_gaussian_noise(const Image& img, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) {
    throw std::invalid_argument("noise sigma must be non-negative");
  }
  Image out = img;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : out.data()) v += noise(rng);
  return out;
}

double rmse(const Image& a, const Image& b) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument("rmse: image shapes differ (" + std::to_string(a.width()) + "x" +
                                std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                                "x" + std::to_string(b.height()) + ")");
  }
  double sum = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = da[i] - db[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(da.size()));
}

Image box_smooth3(const Image& img) {
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double s = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) s += img.clamped(x + dx, y + dy);
      out.at(x, y) = s / 9.0;
    }
  }
  return out;
}

Image downsample2(const Image& img) {
  const int w = std::max(1, img.width() / 2);
  const int h = std::max(1, img.height() / 2);
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.at(x, y) = 0.25 * (img.clamped(2 * x, 2 * y) + img.clamped(2 * x + 1, 2 * y) +
                             img.clamped(2 * x, 2 * y + 1) + img.clamped(2 * x + 1, 2 * y + 1));
    }
  }
  return out;
}

Image upsample_bilinear(const Image& img, int scale) {
  if (scale < 1) throw std::invalid_argument("upsample scale must be >= 1");
  Image out(img.width() * scale, img.height() * scale);
  const double inv = 1.0 / scale;
  for (int v = 0; v < out.height(); ++v) {
    for (int u = 0; u < out.width(); ++u) {
      out.at(u, v) = sample_bilinear(img, {(u + 0.5) * inv - 0.5, (v + 0.5) * inv - 0.5});
    }
  }
  return out;
}

}  // namespace pnnsr
