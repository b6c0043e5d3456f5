#include "lact/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lact {

double ImageGrid::circumradius() const { return std::hypot(half_width(), half_height()); }

double ImageGrid::pixel_x(std::size_t col) const {
  return (static_cast<double>(col) + 0.5) * pixel_size - half_width();
}

double ImageGrid::pixel_y(std::size_t row) const {
  return half_height() - (static_cast<double>(row) + 0.5) * pixel_size;
}

void ImageGrid::validate() const {
  if (width < 1 || height < 1) throw std::invalid_argument("image grid must be at least 1x1");
  if (!(pixel_size > 0.0) || !std::isfinite(pixel_size))
    throw std::invalid_argument("pixel size must be positive");
}

namespace {

void check_increasing(const std::vector<double>& angles, double upper, const char* what) {
  if (angles.empty()) throw std::invalid_argument(std::string(what) + ": no angles");
  for (std::size_t i = 0; i < angles.size(); ++i) {
    if (!std::isfinite(angles[i]) || angles[i] < 0.0 || angles[i] >= upper)
      throw std::invalid_argument(std::string(what) + ": angle out of range");
    if (i > 0 && !(angles[i] > angles[i - 1]))
      throw std::invalid_argument(std::string(what) + ": angles must be strictly increasing");
  }
}

}  // namespace

void ParallelGeometry::validate() const {
  grid.validate();
  check_increasing(angles, std::numbers::pi, "parallel geometry");
  if (n_detectors < 1) throw std::invalid_argument("parallel geometry: no detectors");
  if (!(detector_spacing > 0.0)) throw std::invalid_argument("detector spacing must be positive");
}

double FanGeometry::detector_step() const {
  if (detector_angles.size() < 2) return 2.0 * fan_half_angle;
  return detector_angles[1] - detector_angles[0];
}

void FanGeometry::validate() const {
  grid.validate();
  check_increasing(angles, 2.0 * std::numbers::pi, "fan geometry");
  if (!(source_radius > grid.circumradius()))
    throw std::invalid_argument("fan geometry: source radius " + std::to_string(source_radius) +
                                " lies inside the image circumradius " +
                                std::to_string(grid.circumradius()));
  if (detector_angles.empty()) throw std::invalid_argument("fan geometry: no detectors");
  for (std::size_t i = 0; i < detector_angles.size(); ++i) {
    if (std::abs(detector_angles[i]) > fan_half_angle * (1.0 + 1e-12))
      throw std::invalid_argument("fan geometry: detector outside the fan");
    if (i > 0 && !(detector_angles[i] > detector_angles[i - 1]))
      throw std::invalid_argument("fan geometry: detector angles must increase");
  }
}

const ImageGrid& grid_of(const Geometry& geom) {
  return std::visit([](const auto& g) -> const ImageGrid& { return g.grid; }, geom);
}

std::size_t n_angles(const Geometry& geom) {
  return std::visit([](const auto& g) { return g.angles.size(); }, geom);
}

std::size_t n_detectors(const Geometry& geom) {
  struct {
    std::size_t operator()(const ParallelGeometry& g) const { return g.n_detectors; }
    std::size_t operator()(const FanGeometry& g) const { return g.detector_angles.size(); }
  } count;
  return std::visit(count, geom);
}

std::vector<bool> ViewSelection::mask() const {
  std::vector<bool> m(n_full_views, false);
  for (auto idx : selected) m.at(idx) = true;
  return m;
}

void ViewSelection::validate() const {
  if (selected.empty()) throw std::invalid_argument("view selection is empty");
  std::vector<bool> seen(n_full_views, false);
  for (auto idx : selected) {
    if (idx >= n_full_views)
      throw std::invalid_argument("view index " + std::to_string(idx) + " outside a scan of " +
                                  std::to_string(n_full_views) + " views");
    if (seen[idx]) throw std::invalid_argument("view index repeated in selection");
    seen[idx] = true;
  }
}

ParallelGeometry make_parallel(const ImageGrid& grid, std::size_t n_angles,
                               std::size_t n_detectors) {
  if (n_angles == 0 || n_detectors == 0)
    throw std::invalid_argument("make_parallel: angle and detector counts must be positive");
  grid.validate();
  ParallelGeometry g;
  g.grid = grid;
  g.n_detectors = n_detectors;
  g.angles.resize(n_angles);
  for (std::size_t k = 0; k < n_angles; ++k)
    g.angles[k] = static_cast<double>(k) * std::numbers::pi / static_cast<double>(n_angles);
  return g;
}

FanGeometry make_fan(const ImageGrid& grid, std::size_t n_angles, double source_radius,
                     double fan_half_angle, double det_step) {
  if (n_angles == 0) throw std::invalid_argument("make_fan: angle count must be positive");
  if (!(fan_half_angle > 0.0) || !(det_step > 0.0))
    throw std::invalid_argument("make_fan: fan half angle and detector step must be positive");
  grid.validate();
  if (!(source_radius > grid.circumradius()))
    throw std::invalid_argument("make_fan: source radius " + std::to_string(source_radius) +
                                " places the source inside the object (circumradius " +
                                std::to_string(grid.circumradius()) + ")");
  FanGeometry g;
  g.grid = grid;
  g.source_radius = source_radius;
  g.fan_half_angle = fan_half_angle;
  const auto n_det =
      static_cast<std::size_t>(std::floor(2.0 * fan_half_angle / det_step + 1e-9)) + 1;
  g.detector_angles.resize(n_det);
  const double mid = 0.5 * static_cast<double>(n_det - 1);
  for (std::size_t k = 0; k < n_det; ++k)
    g.detector_angles[k] = (static_cast<double>(k) - mid) * det_step;
  g.angles.resize(n_angles);
  for (std::size_t k = 0; k < n_angles; ++k)
    g.angles[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_angles);
  return g;
}

ViewSelection make_limited(std::size_t n_full, std::size_t n_kept) {
  if (n_kept == 0 || n_kept > n_full)
    throw std::invalid_argument("make_limited: need 0 < kept (" + std::to_string(n_kept) +
                                ") <= full (" + std::to_string(n_full) + ")");
  ViewSelection sel;
  sel.n_full_views = n_full;
  sel.selected.resize(n_kept);
  for (std::size_t k = 0; k < n_kept; ++k) sel.selected[k] = k;
  return sel;
}

}  // namespace lact
