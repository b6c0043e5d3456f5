#pragma once

#include <cstddef>
#include <variant>
#include <vector>

namespace lact {

/// Pixel raster centred on the origin. Lengths are in pixel units unless
/// pixel_size says otherwise.
struct ImageGrid {
  std::size_t width = 0;
  std::size_t height = 0;
  double pixel_size = 1.0;

  std::size_t pixel_count() const { return width * height; }
  double half_width() const { return 0.5 * static_cast<double>(width) * pixel_size; }
  double half_height() const { return 0.5 * static_cast<double>(height) * pixel_size; }
  /// Radius of the circle through the four grid corners.
  double circumradius() const;
  /// Physical coordinates of the centre of pixel (row, col); y grows upwards.
  double pixel_x(std::size_t col) const;
  double pixel_y(std::size_t row) const;

  void validate() const;
  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;
};

struct ParallelGeometry {
  ImageGrid grid;
  std::vector<double> angles;  // radians, strictly increasing in [0, pi)
  std::size_t n_detectors = 0;
  double detector_spacing = 1.0;
  double detector_center = 0.0;

  /// Signed offset of detector bin k from the rotation axis.
  double detector_position(std::size_t k) const {
    return (static_cast<double>(k) - 0.5 * static_cast<double>(n_detectors - 1)) *
               detector_spacing +
           detector_center;
  }

  void validate() const;
  friend bool operator==(const ParallelGeometry&, const ParallelGeometry&) = default;
};

/// Equiangular fan beam with a circular source orbit.
struct FanGeometry {
  ImageGrid grid;
  std::vector<double> angles;  // source angles, radians in [0, 2pi)
  double source_radius = 0.0;
  std::vector<double> detector_angles;  // angle of each ray to the central ray
  double fan_half_angle = 0.0;

  /// Angular spacing between neighbouring detector bins.
  double detector_step() const;

  void validate() const;
  friend bool operator==(const FanGeometry&, const FanGeometry&) = default;
};

using Geometry = std::variant<ParallelGeometry, FanGeometry>;

const ImageGrid& grid_of(const Geometry& geom);
std::size_t n_angles(const Geometry& geom);
std::size_t n_detectors(const Geometry& geom);

/// Indices of the acquired views out of a full scan.
struct ViewSelection {
  std::size_t n_full_views = 0;
  std::vector<std::size_t> selected;

  std::size_t size() const { return selected.size(); }
  /// Row mask over the full scan: true where the view was acquired.
  std::vector<bool> mask() const;

  void validate() const;
  friend bool operator==(const ViewSelection&, const ViewSelection&) = default;
};

ParallelGeometry make_parallel(const ImageGrid& grid, std::size_t n_angles,
                               std::size_t n_detectors);

FanGeometry make_fan(const ImageGrid& grid, std::size_t n_angles, double source_radius,
                     double fan_half_angle, double det_step);

/// Keeps the first n_kept of n_full views.
ViewSelection make_limited(std::size_t n_full, std::size_t n_kept);

}  // namespace lact
