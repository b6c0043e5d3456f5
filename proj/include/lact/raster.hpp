#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lact/geometry.hpp"

namespace lact {

/// Dense row-major 2-D array of doubles.
class Array2 {
 public:
  Array2() = default;
  Array2(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Array2(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  bool all_finite() const;
  friend bool operator==(const Array2&, const Array2&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

/// Attenuation image on a grid; values are height x width.
struct Image {
  ImageGrid grid;
  Array2 values;

  Image() = default;
  explicit Image(const ImageGrid& g) : grid(g), values(g.height, g.width) {}
  Image(const ImageGrid& g, Array2 v);

  friend bool operator==(const Image&, const Image&) = default;
};

/// Full-scan measurements: one row per view, one column per detector bin.
struct Sinogram {
  Array2 values;

  Sinogram() = default;
  explicit Sinogram(Array2 v) : values(std::move(v)) {}
  std::size_t n_angles() const { return values.rows(); }
  std::size_t n_detectors() const { return values.cols(); }

  friend bool operator==(const Sinogram&, const Sinogram&) = default;
};

/// Rows of a full sinogram restricted to the acquired views.
struct LimitedSinogram {
  ViewSelection selection;
  Array2 values;

  friend bool operator==(const LimitedSinogram&, const LimitedSinogram&) = default;
};

/// Zero sinogram shaped for the geometry.
Sinogram zero_sinogram(const Geometry& geom);

void check_matches(const Image& img, const Geometry& geom);
void check_matches(const Sinogram& sino, const Geometry& geom);

}  // namespace lact
