#include "lact/iterative.hpp"

#include <algorithm>
#include <cmath>

#include "lact/projector.hpp"

namespace lact {

GradField grad(const Image& img) {
  const auto h = img.values.rows();
  const auto w = img.values.cols();
  GradField out(h, w);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      const double u = img.values(i, j);
      if (j + 1 < w) out.dx(i, j) = img.values(i, j + 1) - u;
      if (i + 1 < h) out.dy(i, j) = img.values(i + 1, j) - u;
    }
  }
  return out;
}

Image div(const GradField& p, const ImageGrid& grid) {
  const auto h = grid.height;
  const auto w = grid.width;
  if (p.dx.rows() != h || p.dx.cols() != w || p.dy.rows() != h || p.dy.cols() != w)
    throw std::invalid_argument("div: field shape does not match the grid");
  Image out(grid);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      double v = 0.0;
      if (j + 1 < w) v += p.dx(i, j);
      if (j > 0) v -= p.dx(i, j - 1);
      if (i + 1 < h) v += p.dy(i, j);
      if (i > 0) v -= p.dy(i - 1, j);
      out.values(i, j) = v;
    }
  }
  return out;
}

namespace {

double soft(double x, double t) {
  const double m = std::abs(x) - t;
  if (m <= 0.0) return 0.0;
  return x > 0.0 ? m : -m;
}

}  // namespace

GradField shrink(const GradField& x, double threshold) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("shrink: threshold must be >= 0");
  GradField out = x;
  for (auto& v : out.dx.flat()) v = soft(v, threshold);
  for (auto& v : out.dy.flat()) v = soft(v, threshold);
  return out;
}

double total_variation(const Image& img) {
  const auto g = grad(img);
  double tv = 0.0;
  for (double v : g.dx.flat()) tv += std::abs(v);
  for (double v : g.dy.flat()) tv += std::abs(v);
  return tv;
}

namespace {

Array2 apply_sw(const Image& u, const Geometry& geom, const ViewSelection& sel) {
  return restrict_views(project(u, geom), sel).values;
}

Image apply_sw_adjoint(const Array2& r, const Geometry& geom, const ViewSelection& sel) {
  return backproject(pad_dual(LimitedSinogram{sel, r}), geom);
}

}  // namespace

CglsResult cgls(const LimitedSinogram& g, const Geometry& geom, std::size_t max_iters,
                double tol) {
  if (max_iters < 1) throw std::invalid_argument("cgls: max_iters must be >= 1");
  const auto& grid = grid_of(geom);
  const auto& sel = g.selection;
  if (sel.n_full_views != n_angles(geom) || g.values.cols() != n_detectors(geom))
    throw std::invalid_argument("cgls: limited sinogram does not match the geometry");

  CglsResult res;
  res.image = Image(grid);
  Array2 r = g.values;
  Image s = apply_sw_adjoint(r, geom, sel);
  Image p = s;
  double gamma = dot(s.values.flat(), s.values.flat());
  const double normal0 = std::sqrt(gamma);
  res.residual_norms.push_back(norm2(r.flat()));
  res.normal_norms.push_back(normal0);
  if (gamma == 0.0) return res;

  auto x = res.image.values.flat();
  for (std::size_t it = 1; it <= max_iters; ++it) {
    const Array2 q = apply_sw(p, geom, sel);
    const double qq = dot(q.flat(), q.flat());
    if (qq == 0.0) break;
    const double alpha = gamma / qq;
    const auto pv = p.values.flat();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += alpha * pv[i];
    auto rv = r.flat();
    const auto qv = q.flat();
    for (std::size_t i = 0; i < rv.size(); ++i) rv[i] -= alpha * qv[i];
    s = apply_sw_adjoint(r, geom, sel);
    const double gamma_new = dot(s.values.flat(), s.values.flat());
    res.iterations = it;
    res.residual_norms.push_back(norm2(r.flat()));
    res.normal_norms.push_back(std::sqrt(gamma_new));
    if (!std::isfinite(gamma_new)) throw DivergedError("cgls", it);
    if (std::sqrt(gamma_new) <= tol * normal0) break;
    const double beta = gamma_new / gamma;
    gamma = gamma_new;
    auto pm = p.values.flat();
    const auto sv = s.values.flat();
    for (std::size_t i = 0; i < pm.size(); ++i) pm[i] = sv[i] + beta * pm[i];
  }
  return res;
}

void TvParams::validate() const {
  if (!(lambda3 > 0.0) || !(rho > 0.0) || !(t5 > 0.0) || max_iters < 1 || inner_steps < 1)
    throw std::invalid_argument("tv parameters must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("tv epsilon must lie in (0, 1)");
}

Image fbp_limited(const LimitedSinogram& g, const Geometry& geom, const FilterSpec& filt) {
  return FbpOperator(geom, filt).apply(pad_dual(g));
}

TvResult tv_admm(const LimitedSinogram& g, const Geometry& geom, const TvParams& params,
                 const FilterSpec& filt) {
  params.validate();
  const auto& grid = grid_of(geom);
  const auto& sel = g.selection;
  if (sel.n_full_views != n_angles(geom) || g.values.cols() != n_detectors(geom))
    throw std::invalid_argument("tv_admm: limited sinogram does not match the geometry");

  const FbpOperator rinv(geom, filt);
  TvResult res;
  res.image = rinv.apply(pad_dual(g));
  Image& u = res.image;
  if (params.clamp_nonnegative)
    for (auto& x : u.values.flat()) x = std::max(x, 0.0);

  GradField v(grid.height, grid.width);
  GradField c(grid.height, grid.width);
  const double threshold = params.lambda3 / params.rho;

  for (std::size_t k = 1; k <= params.max_iters; ++k) {
    const Array2 previous = u.values;
    for (std::size_t inner = 0; inner < params.inner_steps; ++inner) {
      Array2 resid = apply_sw(u, geom, sel);
      auto rv = resid.flat();
      const auto gv = g.values.flat();
      for (std::size_t i = 0; i < rv.size(); ++i) rv[i] -= gv[i];
      const Image data_term = rinv.apply(pad_dual(LimitedSinogram{sel, std::move(resid)}));

      GradField coupling = grad(u);
      for (std::size_t i = 0; i < coupling.dx.size(); ++i) {
        coupling.dx.flat()[i] += c.dx.flat()[i] - v.dx.flat()[i];
        coupling.dy.flat()[i] += c.dy.flat()[i] - v.dy.flat()[i];
      }
      const Image smooth = div(coupling, grid);

      auto uv = u.values.flat();
      const auto dv = data_term.values.flat();
      const auto sv = smooth.values.flat();
      for (std::size_t i = 0; i < uv.size(); ++i) {
        uv[i] -= params.t5 * (dv[i] - params.rho * sv[i]);
        if (params.clamp_nonnegative && uv[i] < 0.0) uv[i] = 0.0;
      }
    }

    const GradField gu = grad(u);
    GradField shifted = gu;
    for (std::size_t i = 0; i < shifted.dx.size(); ++i) {
      shifted.dx.flat()[i] += c.dx.flat()[i];
      shifted.dy.flat()[i] += c.dy.flat()[i];
    }
    v = shrink(shifted, threshold);
    for (std::size_t i = 0; i < c.dx.size(); ++i) {
      c.dx.flat()[i] += gu.dx.flat()[i] - v.dx.flat()[i];
      c.dy.flat()[i] += gu.dy.flat()[i] - v.dy.flat()[i];
    }

    res.iterations = k;
    if (!u.values.all_finite() || !c.dx.all_finite() || !c.dy.all_finite())
      throw DivergedError("tv_admm", k);

    double change = 0.0;
    double energy = 0.0;
    const auto uv = u.values.flat();
    const auto pv = previous.flat();
    for (std::size_t i = 0; i < uv.size(); ++i) {
      change += (uv[i] - pv[i]) * (uv[i] - pv[i]);
      energy += uv[i] * uv[i];
    }
    if (change == 0.0 || (energy > 0.0 && change / energy <= params.epsilon)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace lact
