#include "lact/analytic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lact/fft.hpp"

namespace lact {

namespace {

using cplx = std::complex<double>;

std::vector<double> filter_periodic(std::span<const double> row, std::span<const double> resp) {
  std::vector<cplx> buf(resp.size());
  for (std::size_t i = 0; i < row.size(); ++i) buf[i] = row[i];
  fft::transform(buf, fft::Direction::forward);
  for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= resp[k];
  fft::transform(buf, fft::Direction::inverse);
  const double inv = 1.0 / static_cast<double>(buf.size());
  std::vector<double> out(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) out[i] = buf[i].real() * inv;
  return out;
}

/// Response of the equiangular fan kernel: the ramp kernel in angle units
/// multiplied by (gamma / sin gamma)^2 / 2, made exactly real and even.
std::vector<double> fan_response(std::size_t padded, double step, const FilterSpec& filt) {
  std::vector<cplx> ramp(padded);
  const auto resp = ramp_response(padded, filt);
  for (std::size_t k = 0; k < padded; ++k) ramp[k] = resp[k];
  fft::transform(ramp, fft::Direction::inverse);
  const double inv = 1.0 / static_cast<double>(padded);
  std::vector<cplx> kernel(padded);
  for (std::size_t n = 0; n < padded; ++n) {
    const double eta = n <= padded / 2 ? static_cast<double>(n)
                                       : static_cast<double>(n) - static_cast<double>(padded);
    const double g = eta * step;
    double weight = 0.5;
    if (g != 0.0) {
      if (std::abs(g) >= 0.999 * std::numbers::pi) {
        weight = 0.0;
      } else {
        const double r = g / std::sin(g);
        weight = 0.5 * r * r;
      }
    }
    kernel[n] = weight * ramp[n].real() * inv / step;
  }
  fft::transform(kernel, fft::Direction::forward);
  std::vector<double> out(padded);
  for (std::size_t k = 0; k < padded; ++k) {
    const std::size_t mirror = (padded - k) % padded;
    out[k] = 0.5 * (kernel[k].real() + kernel[mirror].real());
  }
  return out;
}

/// Linear interpolation weights for fractional detector coordinate pos.
struct Lerp {
  long i0;
  double f;
};

inline Lerp lerp_at(double pos) {
  const double fl = std::floor(pos);
  return {static_cast<long>(fl), pos - fl};
}

}  // namespace

void FilterSpec::validate() const {
  if (!(cutoff > 0.0 && cutoff <= 1.0))
    throw std::invalid_argument("filter cutoff must lie in (0, 1]");
}

std::vector<double> ramp_response(std::size_t n, const FilterSpec& filt) {
  filt.validate();
  std::vector<double> resp(n, 0.0);
  const double fc = 0.5 * filt.cutoff;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = static_cast<double>(std::min(k, n - k)) / static_cast<double>(n);
    if (f > fc * (1.0 + 1e-12)) continue;
    double gain = f;
    if (filt.kind == FilterSpec::Kind::hann)
      gain *= 0.5 * (1.0 + std::cos(std::numbers::pi * f / fc));
    resp[k] = gain;
  }
  return resp;
}

std::vector<double> apply_ramp(std::span<const double> row, const FilterSpec& filt) {
  if (row.empty()) return {};
  const auto padded = fft::next_pow2(2 * row.size());
  return filter_periodic(row, ramp_response(padded, filt));
}

std::vector<double> apply_ramp_circular(std::span<const double> row, const FilterSpec& filt) {
  if (row.empty()) return {};
  return filter_periodic(row, ramp_response(row.size(), filt));
}

FbpOperator::FbpOperator(Geometry geom, FilterSpec filt)
    : geom_(std::move(geom)), filt_(filt) {
  filt_.validate();
  std::visit([](const auto& g) { g.validate(); }, geom_);
  const auto n_det = n_detectors(geom_);
  padded_ = fft::next_pow2(2 * n_det);
  pre_weight_.assign(n_det, 1.0);
  if (const auto* p = std::get_if<ParallelGeometry>(&geom_)) {
    response_ = ramp_response(padded_, filt_);
    for (auto& r : response_) r /= p->detector_spacing;
  } else {
    const auto& f = std::get<FanGeometry>(geom_);
    response_ = fan_response(padded_, f.detector_step(), filt_);
    for (std::size_t k = 0; k < n_det; ++k)
      pre_weight_[k] = f.source_radius * std::cos(f.detector_angles[k]);
  }
}

void FbpOperator::filter_rows(Array2& rows) const {
  std::vector<cplx> buf(padded_);
  const double inv = 1.0 / static_cast<double>(padded_);
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    auto row = rows.row(r);
    std::fill(buf.begin(), buf.end(), cplx{});
    for (std::size_t i = 0; i < row.size(); ++i) buf[i] = row[i];
    fft::transform(buf, fft::Direction::forward);
    for (std::size_t k = 0; k < padded_; ++k) buf[k] *= response_[k];
    fft::transform(buf, fft::Direction::inverse);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = buf[i].real() * inv;
  }
}

Image FbpOperator::apply(const Sinogram& sino) const {
  check_matches(sino, geom_);
  Array2 work = sino.values;
  for (std::size_t r = 0; r < work.rows(); ++r) {
    auto row = work.row(r);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] *= pre_weight_[i];
  }
  filter_rows(work);
  Image out(grid_of(geom_));
  if (std::holds_alternative<ParallelGeometry>(geom_))
    backproject_parallel(work, out);
  else
    backproject_fan(work, out);
  return out;
}

Sinogram FbpOperator::adjoint(const Image& img) const {
  check_matches(img, geom_);
  Array2 work(n_angles(geom_), n_detectors(geom_));
  if (std::holds_alternative<ParallelGeometry>(geom_))
    spread_parallel(img, work);
  else
    spread_fan(img, work);
  // the padded circulant filter is symmetric, so it is its own transpose
  filter_rows(work);
  for (std::size_t r = 0; r < work.rows(); ++r) {
    auto row = work.row(r);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] *= pre_weight_[i];
  }
  return Sinogram(std::move(work));
}

void FbpOperator::backproject_parallel(const Array2& filtered, Image& out) const {
  const auto& g = std::get<ParallelGeometry>(geom_);
  const auto n_det = static_cast<long>(g.n_detectors);
  const double first = g.detector_position(0);
  const double weight = std::numbers::pi / static_cast<double>(g.angles.size());
  for (std::size_t v = 0; v < g.angles.size(); ++v) {
    const double c = std::cos(g.angles[v]);
    const double s = std::sin(g.angles[v]);
    const auto q = filtered.row(v);
    for (std::size_t row = 0; row < g.grid.height; ++row) {
      const double y = g.grid.pixel_y(row);
      for (std::size_t col = 0; col < g.grid.width; ++col) {
        const double t = g.grid.pixel_x(col) * c + y * s;
        const auto [i0, f] = lerp_at((t - first) / g.detector_spacing);
        double val = 0.0;
        if (i0 >= 0 && i0 < n_det) val += (1.0 - f) * q[static_cast<std::size_t>(i0)];
        if (i0 + 1 >= 0 && i0 + 1 < n_det) val += f * q[static_cast<std::size_t>(i0 + 1)];
        out.values(row, col) += weight * val;
      }
    }
  }
}

void FbpOperator::spread_parallel(const Image& img, Array2& out) const {
  const auto& g = std::get<ParallelGeometry>(geom_);
  const auto n_det = static_cast<long>(g.n_detectors);
  const double first = g.detector_position(0);
  const double weight = std::numbers::pi / static_cast<double>(g.angles.size());
  for (std::size_t v = 0; v < g.angles.size(); ++v) {
    const double c = std::cos(g.angles[v]);
    const double s = std::sin(g.angles[v]);
    auto q = out.row(v);
    for (std::size_t row = 0; row < g.grid.height; ++row) {
      const double y = g.grid.pixel_y(row);
      for (std::size_t col = 0; col < g.grid.width; ++col) {
        const double t = g.grid.pixel_x(col) * c + y * s;
        const auto [i0, f] = lerp_at((t - first) / g.detector_spacing);
        const double val = weight * img.values(row, col);
        if (i0 >= 0 && i0 < n_det) q[static_cast<std::size_t>(i0)] += (1.0 - f) * val;
        if (i0 + 1 >= 0 && i0 + 1 < n_det) q[static_cast<std::size_t>(i0 + 1)] += f * val;
      }
    }
  }
}

namespace {

/// Per-pixel fan coordinates for one source position.
struct FanSample {
  double pos;     // fractional detector index
  double weight;  // 1 / L^2
};

inline FanSample fan_sample(const FanGeometry& g, double sx, double sy, double cx, double cy,
                            double x, double y) {
  const double vx = x - sx;
  const double vy = y - sy;
  const double l2 = vx * vx + vy * vy;
  const double gamma = std::atan2(cx * vy - cy * vx, cx * vx + cy * vy);
  return {(gamma - g.detector_angles.front()) / g.detector_step(), 1.0 / l2};
}

}  // namespace

void FbpOperator::backproject_fan(const Array2& filtered, Image& out) const {
  const auto& g = std::get<FanGeometry>(geom_);
  const auto n_det = static_cast<long>(g.detector_angles.size());
  const double dbeta = 2.0 * std::numbers::pi / static_cast<double>(g.angles.size());
  for (std::size_t v = 0; v < g.angles.size(); ++v) {
    const double cb = std::cos(g.angles[v]);
    const double sb = std::sin(g.angles[v]);
    const double sx = g.source_radius * cb;
    const double sy = g.source_radius * sb;
    const auto q = filtered.row(v);
    for (std::size_t row = 0; row < g.grid.height; ++row) {
      const double y = g.grid.pixel_y(row);
      for (std::size_t col = 0; col < g.grid.width; ++col) {
        const auto smp = fan_sample(g, sx, sy, -cb, -sb, g.grid.pixel_x(col), y);
        const auto [i0, f] = lerp_at(smp.pos);
        double val = 0.0;
        if (i0 >= 0 && i0 < n_det) val += (1.0 - f) * q[static_cast<std::size_t>(i0)];
        if (i0 + 1 >= 0 && i0 + 1 < n_det) val += f * q[static_cast<std::size_t>(i0 + 1)];
        out.values(row, col) += dbeta * smp.weight * val;
      }
    }
  }
}

void FbpOperator::spread_fan(const Image& img, Array2& out) const {
  const auto& g = std::get<FanGeometry>(geom_);
  const auto n_det = static_cast<long>(g.detector_angles.size());
  const double dbeta = 2.0 * std::numbers::pi / static_cast<double>(g.angles.size());
  for (std::size_t v = 0; v < g.angles.size(); ++v) {
    const double cb = std::cos(g.angles[v]);
    const double sb = std::sin(g.angles[v]);
    const double sx = g.source_radius * cb;
    const double sy = g.source_radius * sb;
    auto q = out.row(v);
    for (std::size_t row = 0; row < g.grid.height; ++row) {
      const double y = g.grid.pixel_y(row);
      for (std::size_t col = 0; col < g.grid.width; ++col) {
        const auto smp = fan_sample(g, sx, sy, -cb, -sb, g.grid.pixel_x(col), y);
        const auto [i0, f] = lerp_at(smp.pos);
        const double val = dbeta * smp.weight * img.values(row, col);
        if (i0 >= 0 && i0 < n_det) q[static_cast<std::size_t>(i0)] += (1.0 - f) * val;
        if (i0 + 1 >= 0 && i0 + 1 < n_det) q[static_cast<std::size_t>(i0 + 1)] += f * val;
      }
    }
  }
}

Image fbp(const Sinogram& sino, const ParallelGeometry& geom, const FilterSpec& filt) {
  return FbpOperator(geom, filt).apply(sino);
}

Image fbp_fan(const Sinogram& sino, const FanGeometry& geom, const FilterSpec& filt) {
  return FbpOperator(geom, filt).apply(sino);
}

}  // namespace lact
