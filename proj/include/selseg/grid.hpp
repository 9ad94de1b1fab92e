#ifndef SELSEG_GRID_HPP_
#define SELSEG_GRID_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace selseg {

/// Invalid arguments or inputs violating a documented precondition.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File system or codec failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point {
  int x = 0;  // column
  int y = 0;  // row
  friend bool operator==(Point const&, Point const&) = default;
  friend auto operator<=>(Point const&, Point const&) = default;
};

/// Dense row-major 2D grid with unit spacing.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 0 || height < 0) {
      throw InputError("grid dimensions must be non-negative");
    }
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }
  Grid(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0 ||
        data_.size() != static_cast<std::size_t>(width) * height) {
      throw InputError("grid data size does not match dimensions");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  T const& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  T const& operator[](std::size_t i) const { return data_[i]; }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  bool contains(Point p) const { return contains(p.x, p.y); }

  /// Half-sample symmetric (reflecting) access: index -1 maps to 0, n to n-1.
  T const& reflected(int x, int y) const {
    return (*this)(reflect(x, width_), reflect(y, height_));
  }

  std::span<T> values() { return data_; }
  std::span<T const> values() const { return data_; }
  std::vector<T> const& storage() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  template <typename U>
  bool same_shape(Grid<U> const& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(Grid const&, Grid const&) = default;

  static int reflect(int i, int n) {
    if (n == 1) return 0;
    int const period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using ScalarField = Grid<double>;

/// {0,1} labels.
using BinaryMask = Grid<std::uint8_t>;

template <typename A, typename B>
void require_same_shape(Grid<A> const& a, Grid<B> const& b, char const* what) {
  if (!a.same_shape(b)) {
    throw InputError(std::string(what) + ": grid dimensions differ");
  }
}

/// Observed image with intensities in [0,1] and at least 3x3 pixels.
class GrayImage {
 public:
  GrayImage() = default;

  /// Takes intensities that already lie in [0,1].
  explicit GrayImage(ScalarField pixels) : pixels_(std::move(pixels)) {
    if (pixels_.width() < 3 || pixels_.height() < 3) {
      throw InputError("image must be at least 3x3 pixels");
    }
    for (double v : pixels_) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InputError("image intensities must lie in [0,1]");
      }
    }
  }

  /// Min-max normalisation to [0,1]; a constant input maps to all zeros.
  static GrayImage normalized(ScalarField raw) {
    if (raw.width() < 3 || raw.height() < 3) {
      throw InputError("image must be at least 3x3 pixels");
    }
    auto const [lo, hi] = std::minmax_element(raw.begin(), raw.end());
    double const mn = *lo;
    double const range = *hi - mn;
    for (double& v : raw) {
      v = range > 0.0 ? std::clamp((v - mn) / range, 0.0, 1.0) : 0.0;
    }
    return GrayImage(std::move(raw));
  }

  int width() const { return pixels_.width(); }
  int height() const { return pixels_.height(); }
  std::size_t size() const { return pixels_.size(); }
  double operator()(int x, int y) const { return pixels_(x, y); }
  double operator[](std::size_t i) const { return pixels_[i]; }
  ScalarField const& field() const { return pixels_; }

  friend bool operator==(GrayImage const&, GrayImage const&) = default;

 private:
  ScalarField pixels_;
};

inline std::size_t count_ones(BinaryMask const& m) {
  return static_cast<std::size_t>(std::count(m.begin(), m.end(), std::uint8_t{1}));
}

inline double max_abs(ScalarField const& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace selseg

#endif  // SELSEG_GRID_HPP_
