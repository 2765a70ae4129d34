#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pnnsr {

/// Continuous image-plane position in pixel units. Pixel (i, j) has its
/// center at (i, j).
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Grayscale raster of real intensities in gray levels, row-major.
/// Values are never clamped here; clamping happens on PGM export only.
class Image {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0);
  Image(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int x, int y) { return data_[index(x, y)]; }
  double at(int x, int y) const { return data_[index(x, y)]; }

  /// Pixel value with coordinates clamped into the raster.
  double clamped(int x, int y) const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Bilinear blend of the four surrounding pixel centers; points outside the
/// raster are clamped to the border first.
double sample_bilinear(const Image& img, Point2 p);

/// sqrt(gx^2 + gy^2) using central differences in the interior and one-sided
/// differences on the border rows/columns.
Image gradient_magnitude(const Image& img);

/// Horizontal and vertical derivatives with the same stencil as
/// gradient_magnitude.
Image gradient_x(const Image& img);
Image gradient_y(const Image& img);

/// Adds independent N(0, sigma^2) noise per pixel from a generator seeded by
/// `seed`. Throws std::invalid_argument on negative sigma.
Image add_gaussian_noise(const Image& img, double sigma, std::uint64_t seed);

/// Root-mean-square difference in gray levels. Throws std::invalid_argument
/// on a shape mismatch.
double rmse(const Image& a, const Image& b);

/// 3x3 box mean with replicate padding.
Image box_smooth3(const Image& img);

/// Factor-2 reduction by 2x2 averaging; odd trailing rows/columns dropped.
/// A coarse pixel center c sits at fine coordinate 2c + 0.5.
Image downsample2(const Image& img);

/// Bilinear upsampling by an integer factor using the area-consistent
/// center alignment: output node u samples input coordinate (u + 0.5)/L - 0.5.
Image upsample_bilinear(const Image& img, int scale);

}  // namespace pnnsr
