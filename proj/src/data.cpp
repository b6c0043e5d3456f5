#include "lact/data.hpp"

#include "lact/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>


namespace lact {

void PhantomSpec::validate() const {
  if (size < 8) throw std::invalid_argument("phantom size must be at least 8");
}

bool Ellipse::contains(double x, double y) const {
  const double t = tilt_deg * std::numbers::pi / 180.0;
  const double ct = std::cos(t);
  const double st = std::sin(t);
  const double dx = x - cx;
  const double dy = y - cy;
  const double a = (dx * ct + dy * st) / semi_x;
  const double b = (-dx * st + dy * ct) / semi_y;
  return a * a + b * b <= 1.0;
}

namespace {

// Toft's modified Shepp-Logan table.
constexpr std::array<Ellipse, 10> kSheppLogan{{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
    {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
    {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
    {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
}};

template <class Range>
Image rasterize(std::size_t size, const Range& ellipses) {
  ImageGrid grid{size, size, 1.0};
  Image img(grid);
  const double half = 0.5 * static_cast<double>(size);
  for (std::size_t r = 0; r < size; ++r) {
    const double y = grid.pixel_y(r) / half;
    for (std::size_t c = 0; c < size; ++c) {
      const double x = grid.pixel_x(c) / half;
      double v = 0.0;
      for (const auto& e : ellipses)
        if (e.contains(x, y)) v += e.intensity;
      img.values(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

}  // namespace

Image shepp_logan(std::size_t size) {
  PhantomSpec{PhantomSpec::Kind::shepp_logan, size}.validate();
  return rasterize(size, kSheppLogan);
}

Image random_phantom(const PhantomSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<Ellipse> ellipses;
  ellipses.push_back({rng.uniform(0.3, 0.5), rng.uniform(0.65, 0.85), rng.uniform(0.75, 0.9),
                      0.0, 0.0, rng.uniform(-10.0, 10.0)});
  for (std::size_t i = 0; i < spec.n_ellipses; ++i) {
    Ellipse e;
    e.intensity = rng.uniform(-0.25, 0.5);
    e.semi_x = rng.uniform(0.05, 0.3);
    e.semi_y = rng.uniform(0.05, 0.3);
    e.cx = rng.uniform(-0.45, 0.45);
    e.cy = rng.uniform(-0.5, 0.5);
    e.tilt_deg = rng.uniform(0.0, 180.0);
    ellipses.push_back(e);
  }
  return rasterize(spec.size, ellipses);
}

Image make_phantom(const PhantomSpec& spec) {
  return spec.kind == PhantomSpec::Kind::shepp_logan ? shepp_logan(spec.size)
                                                     : random_phantom(spec);
}

namespace {

void check_same_shape(const Image& u, const Image& label) {
  if (u.values.rows() != label.values.rows() || u.values.cols() != label.values.cols())
    throw std::invalid_argument("metric: image shapes differ");
  if (u.values.size() == 0) throw std::invalid_argument("metric: empty image");
}

double label_range(const Image& label) {
  const auto [lo, hi] = std::minmax_element(label.values.flat().begin(), label.values.flat().end());
  return *hi - *lo;
}

}  // namespace

double psnr(const Image& u, const Image& label) {
  check_same_shape(u, label);
  const double range = label_range(label);
  if (!(range > 0.0)) throw UndefinedMetric("psnr: label image is constant");
  double sse = 0.0;
  const auto a = u.values.flat();
  const auto b = label.values.flat();
  for (std::size_t i = 0; i < a.size(); ++i) sse += (a[i] - b[i]) * (a[i] - b[i]);
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(a.size());
  return 10.0 * std::log10(range * range / mse);
}

double ssim(const Image& u, const Image& label) {
  check_same_shape(u, label);
  double range = label_range(label);
  if (!(range > 0.0)) range = 1.0;
  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);
  const auto a = u.values.flat();
  const auto b = label.values.flat();
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double va = 0.0, vb = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
    cov += (a[i] - ma) * (b[i] - mb);
  }
  va /= n;
  vb /= n;
  cov /= n;
  return ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

}  // namespace lact
