#include "lact/projector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lact {

namespace {

constexpr double kParallelTol = 1e-12;

Ray parallel_ray(const ParallelGeometry& g, std::size_t view, std::size_t det) {
  const double th = g.angles[view];
  const double c = std::cos(th);
  const double s = std::sin(th);
  const double t = g.detector_position(det);
  return {t * c, t * s, -s, c};
}

Ray fan_ray(const FanGeometry& g, std::size_t view, std::size_t det) {
  const double beta = g.angles[view];
  const double gamma = g.detector_angles[det];
  const double sx = g.source_radius * std::cos(beta);
  const double sy = g.source_radius * std::sin(beta);
  // central ray points from the source to the origin; rotate it by gamma
  const double cx = -std::cos(beta);
  const double cy = -std::sin(beta);
  const double cg = std::cos(gamma);
  const double sg = std::sin(gamma);
  return {sx, sy, cx * cg - cy * sg, cx * sg + cy * cg};
}

/// Walks the pixels crossed by a ray, reporting (flat pixel index, chord length).
/// Segment ownership follows the half-open convention [x_k, x_k+1).
class RayTracer {
 public:
  explicit RayTracer(const ImageGrid& grid) : grid_(grid) {
    alphas_.reserve(grid.width + grid.height + 4);
  }

  template <class Visit>
  void trace(const Ray& r, Visit&& visit) {
    const double xmin = -grid_.half_width();
    const double xmax = grid_.half_width();
    const double ymin = -grid_.half_height();
    const double ymax = grid_.half_height();
    const double ps = grid_.pixel_size;

    double a0 = -std::numeric_limits<double>::infinity();
    double a1 = std::numeric_limits<double>::infinity();
    const bool x_flat = std::abs(r.dx) < kParallelTol;
    const bool y_flat = std::abs(r.dy) < kParallelTol;
    if (x_flat) {
      if (r.x0 < xmin || r.x0 >= xmax) return;
    } else {
      const double ta = (xmin - r.x0) / r.dx;
      const double tb = (xmax - r.x0) / r.dx;
      a0 = std::max(a0, std::min(ta, tb));
      a1 = std::min(a1, std::max(ta, tb));
    }
    if (y_flat) {
      if (r.y0 < ymin || r.y0 >= ymax) return;
    } else {
      const double ta = (ymin - r.y0) / r.dy;
      const double tb = (ymax - r.y0) / r.dy;
      a0 = std::max(a0, std::min(ta, tb));
      a1 = std::min(a1, std::max(ta, tb));
    }
    if (!(a1 > a0)) return;

    alphas_.clear();
    alphas_.push_back(a0);
    if (!x_flat) {
      for (std::size_t k = 1; k < grid_.width; ++k) {
        const double a = (xmin + static_cast<double>(k) * ps - r.x0) / r.dx;
        if (a > a0 && a < a1) alphas_.push_back(a);
      }
    }
    if (!y_flat) {
      for (std::size_t k = 1; k < grid_.height; ++k) {
        const double a = (ymin + static_cast<double>(k) * ps - r.y0) / r.dy;
        if (a > a0 && a < a1) alphas_.push_back(a);
      }
    }
    alphas_.push_back(a1);
    std::sort(alphas_.begin() + 1, alphas_.end() - 1);

    const auto w = static_cast<long>(grid_.width);
    const auto h = static_cast<long>(grid_.height);
    for (std::size_t k = 0; k + 1 < alphas_.size(); ++k) {
      const double len = alphas_[k + 1] - alphas_[k];
      if (!(len > 0.0)) continue;
      const double am = 0.5 * (alphas_[k] + alphas_[k + 1]);
      const double xm = r.x0 + am * r.dx;
      const double ym = r.y0 + am * r.dy;
      const auto col = static_cast<long>(std::floor((xm - xmin) / ps));
      // rows count downwards from the top edge; y in [ymin, ymax) like x
      const auto row = static_cast<long>(std::ceil((ymax - ym) / ps)) - 1;
      if (col < 0 || col >= w || row < 0 || row >= h) continue;
      visit(static_cast<std::size_t>(row * w + col), len);
    }
  }

 private:
  const ImageGrid& grid_;
  std::vector<double> alphas_;
};

}  // namespace

Ray ray_for(const Geometry& geom, std::size_t view, std::size_t det) {
  if (view >= n_angles(geom) || det >= n_detectors(geom))
    throw std::invalid_argument("ray_for: view or detector index out of range");
  if (const auto* p = std::get_if<ParallelGeometry>(&geom)) return parallel_ray(*p, view, det);
  return fan_ray(std::get<FanGeometry>(geom), view, det);
}

Sinogram project(const Image& img, const Geometry& geom) {
  check_matches(img, geom);
  Sinogram out = zero_sinogram(geom);
  RayTracer tracer(img.grid);
  const auto values = img.values.flat();
  for (std::size_t v = 0; v < out.n_angles(); ++v) {
    for (std::size_t d = 0; d < out.n_detectors(); ++d) {
      double acc = 0.0;
      tracer.trace(ray_for(geom, v, d),
                   [&](std::size_t pix, double len) { acc += len * values[pix]; });
      out.values(v, d) = acc;
    }
  }
  return out;
}

Image backproject(const Sinogram& sino, const Geometry& geom) {
  check_matches(sino, geom);
  const auto& grid = grid_of(geom);
  Image out(grid);
  RayTracer tracer(grid);
  auto values = out.values.flat();
  for (std::size_t v = 0; v < sino.n_angles(); ++v) {
    for (std::size_t d = 0; d < sino.n_detectors(); ++d) {
      const double y = sino.values(v, d);
      if (y == 0.0) continue;
      tracer.trace(ray_for(geom, v, d),
                   [&](std::size_t pix, double len) { values[pix] += len * y; });
    }
  }
  return out;
}

LimitedSinogram restrict_views(const Sinogram& sino, const ViewSelection& sel) {
  if (sel.n_full_views != sino.n_angles())
    throw std::invalid_argument("restrict: selection is for a scan of " +
                                std::to_string(sel.n_full_views) + " views, sinogram has " +
                                std::to_string(sino.n_angles()));
  sel.validate();
  LimitedSinogram out{sel, Array2(sel.size(), sino.n_detectors())};
  for (std::size_t k = 0; k < sel.size(); ++k) {
    const auto src = sino.values.row(sel.selected[k]);
    std::copy(src.begin(), src.end(), out.values.row(k).begin());
  }
  return out;
}

Sinogram pad_dual(const LimitedSinogram& lim) {
  if (lim.values.rows() != lim.selection.size())
    throw std::invalid_argument("pad_dual: row count differs from selection size");
  Sinogram out(Array2(lim.selection.n_full_views, lim.values.cols()));
  for (std::size_t k = 0; k < lim.selection.size(); ++k) {
    const auto src = lim.values.row(k);
    std::copy(src.begin(), src.end(), out.values.row(lim.selection.selected.at(k)).begin());
  }
  return out;
}

}  // namespace lact
