#include "lact/raster.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lact {

Array2::Array2(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw std::invalid_argument("Array2: data size mismatch");
}

bool Array2::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Image::Image(const ImageGrid& g, Array2 v) : grid(g), values(std::move(v)) {
  if (values.rows() != g.height || values.cols() != g.width)
    throw std::invalid_argument("image values do not match the grid shape");
}

Sinogram zero_sinogram(const Geometry& geom) {
  return Sinogram(Array2(n_angles(geom), n_detectors(geom)));
}

void check_matches(const Image& img, const Geometry& geom) {
  const auto& g = grid_of(geom);
  if (!(img.grid == g) || img.values.rows() != g.height || img.values.cols() != g.width)
    throw std::invalid_argument("image grid " + std::to_string(img.grid.width) + "x" +
                                std::to_string(img.grid.height) +
                                " does not match geometry grid " + std::to_string(g.width) +
                                "x" + std::to_string(g.height));
}

void check_matches(const Sinogram& sino, const Geometry& geom) {
  if (sino.n_angles() != n_angles(geom) || sino.n_detectors() != n_detectors(geom))
    throw std::invalid_argument("sinogram " + std::to_string(sino.n_angles()) + "x" +
                                std::to_string(sino.n_detectors()) +
                                " does not match geometry " + std::to_string(n_angles(geom)) +
                                "x" + std::to_string(n_detectors(geom)));
}

}  // namespace lact
