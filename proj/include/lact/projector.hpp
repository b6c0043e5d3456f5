#pragma once

#include <cstddef>

#include "lact/geometry.hpp"
#include "lact/raster.hpp"

namespace lact {

/// A measurement line: origin plus unit direction.
struct Ray {
  double x0 = 0.0;
  double y0 = 0.0;
  double dx = 0.0;
  double dy = 0.0;
};

/// Line through detector bin `det` at view `view`.
Ray ray_for(const Geometry& geom, std::size_t view, std::size_t det);

/// Forward operator W: exact ray/pixel intersection lengths (Siddon traversal).
Sinogram project(const Image& img, const Geometry& geom);

/// Transposed traversal; the exact adjoint of project.
Image backproject(const Sinogram& sino, const Geometry& geom);

/// S: keeps the selected rows, in selection order.
LimitedSinogram restrict_views(const Sinogram& sino, const ViewSelection& sel);

/// S*: scatters rows back into a full-scan sinogram, zeros elsewhere.
Sinogram pad_dual(const LimitedSinogram& lim);

}  // namespace lact
