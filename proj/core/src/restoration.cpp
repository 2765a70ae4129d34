#include "pnnsr/restoration.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pnnsr/parallel.hpp"
#include "pnnsr/text_io.hpp"

namespace pnnsr {

FirFilter FirFilter::delta(int size) {
  FirFilter f;
  f.size = size;
  f.coeffs.assign(static_cast<std::size_t>(size) * size, 0.0);
  f.coeffs[static_cast<std::size_t>(size / 2) * size + size / 2] = 1.0;
  f.validate();
  return f;
}

void FirFilter::validate() const {
  if (size < 1 || size % 2 == 0) throw std::invalid_argument("filter size must be odd and >= 1");
  if (coeffs.size() != static_cast<std::size_t>(size) * size) {
    throw std::invalid_argument("filter has " + std::to_string(coeffs.size()) +
                                " coefficients, expected " + std::to_string(size * size));
  }
  for (double c : coeffs) {
    if (!std::isfinite(c)) throw std::invalid_argument("filter coefficient is not finite");
  }
}

namespace {

void check_pairs(std::span<const ImagePair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("filter design needs at least one image pair");
  for (const auto& p : pairs) {
    if (!p.degraded.same_shape(p.target)) {
      throw std::invalid_argument("filter design pair has mismatched image sizes");
    }
  }
}

}  // namespace

FirFilter design_filter(std::span<const ImagePair> pairs, int size, double noise_sigma) {
  if (size < 1 || size % 2 == 0) throw std::invalid_argument("filter size must be odd and >= 1");
  check_pairs(pairs);
  const int r = size / 2;
  const int taps = size * size;

  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(taps, taps);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(taps);
  std::size_t rows_used = 0;
  for (const auto& pair : pairs) {
    const Image& img = pair.degraded;
    const int w = img.width() - 2 * r;
    const int h = img.height() - 2 * r;
    if (w <= 0 || h <= 0) continue;
    Eigen::MatrixXd patches(static_cast<Eigen::Index>(w) * h, taps);
    Eigen::VectorXd targets(static_cast<Eigen::Index>(w) * h);
    Eigen::Index row = 0;
    for (int y = r; y < img.height() - r; ++y) {
      for (int x = r; x < img.width() - r; ++x, ++row) {
        for (int j = 0; j < size; ++j)
          for (int i = 0; i < size; ++i) patches(row, j * size + i) = img.at(x + i - r, y + j - r);
        targets(row) = pair.target.at(x, y);
      }
    }
    normal.selfadjointView<Eigen::Lower>().rankUpdate(patches.transpose());
    rhs.noalias() += patches.transpose() * targets;
    rows_used += static_cast<std::size_t>(row);
  }
  if (rows_used == 0) {
    throw FilterDesignError("filter design failed: images are smaller than the filter support");
  }
  normal = normal.selfadjointView<Eigen::Lower>();
  normal.diagonal().array() += 1e-8;

  const Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success) {
    throw FilterDesignError("filter design failed: singular normal equations");
  }
  const Eigen::VectorXd c = llt.solve(rhs);
  if (!c.allFinite()) throw FilterDesignError("filter design failed: non-finite solution");

  FirFilter f;
  f.size = size;
  f.noise_sigma = noise_sigma;
  f.coeffs.assign(c.data(), c.data() + c.size());
  return f;
}

double design_objective(std::span<const ImagePair> pairs, const FirFilter& filter) {
  filter.validate();
  check_pairs(pairs);
  const int r = filter.radius();
  double sum = 0.0;
  for (const auto& pair : pairs) {
    const Image out = apply_filter(pair.degraded, filter);
    for (int y = r; y < out.height() - r; ++y) {
      for (int x = r; x < out.width() - r; ++x) {
        const double e = out.at(x, y) - pair.target.at(x, y);
        sum += e * e;
      }
    }
  }
  return sum;
}

Image apply_filter(const Image& img, const FirFilter& filter, unsigned threads) {
  filter.validate();
  const int k = filter.size;
  const int r = filter.radius();
  Image out(img.width(), img.height());
  parallel_for(static_cast<std::size_t>(img.height()), threads,
               [&](std::size_t begin, std::size_t end) {
                 for (int y = static_cast<int>(begin); y < static_cast<int>(end); ++y) {
                   for (int x = 0; x < img.width(); ++x) {
                     double acc = 0.0;
                     for (int j = 0; j < k; ++j)
                       for (int i = 0; i < k; ++i)
                         acc += filter.at(i, j) * img.clamped(x + i - r, y + j - r);
                     out.at(x, y) = acc;
                   }
                 }
               });
  return out;
}

std::string format_filter(const FirFilter& filter) {
  filter.validate();
  std::string out = "FIRF 1\nsize=" + std::to_string(filter.size) +
                    " noise_sigma=" + format_real(filter.noise_sigma) +
                    " orientation=correlation\n";
  for (int j = 0; j < filter.size; ++j) {
    for (int i = 0; i < filter.size; ++i) {
      out += format_real(filter.at(i, j));
      out += i + 1 < filter.size ? " " : "\n";
    }
  }
  return out;
}

FirFilter parse_filter(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "FIRF 1") {
    throw FormatError("not a filter file (expected \"FIRF 1\" header)");
  }
  if (!std::getline(in, line)) throw FormatError("filter file is missing its size line");
  const auto kv = parse_key_values(line);
  const auto size_it = kv.find("size");
  const auto sigma_it = kv.find("noise_sigma");
  if (size_it == kv.end() || sigma_it == kv.end()) {
    throw FormatError("filter header needs size= and noise_sigma=");
  }
  if (const auto o = kv.find("orientation"); o != kv.end() && o->second != "correlation") {
    throw FormatError("unsupported filter orientation \"" + o->second + "\"");
  }
  FirFilter f;
  const auto size = parse_integer(size_it->second, "filter size");
  if (size < 1 || size % 2 == 0 || size > 255) throw FormatError("filter size must be odd, 1..255");
  f.size = static_cast<int>(size);
  f.noise_sigma = parse_real(sigma_it->second, "noise_sigma");
  f.coeffs.clear();
  std::string token;
  while (in >> token) f.coeffs.push_back(parse_real(token, "filter coefficient"));
  if (f.coeffs.size() != static_cast<std::size_t>(f.size) * f.size) {
    throw FormatError("filter file has " + std::to_string(f.coeffs.size()) +
                      " coefficients, expected " + std::to_string(f.size * f.size));
  }
  return f;
}

FirFilter read_filter_file(const std::filesystem::path& path) {
  try {
    return parse_filter(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_filter_file(const std::filesystem::path& path, const FirFilter& filter) {
  write_text_file(path, format_filter(filter));
}

}  // namespace pnnsr
