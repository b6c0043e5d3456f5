#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "lact/raster.hpp"

namespace lact {

struct PhantomSpec {
  enum class Kind { shepp_logan, random_ellipses };
  Kind kind = Kind::shepp_logan;
  std::size_t size = 128;
  std::uint64_t seed = 0;
  std::size_t n_ellipses = 8;

  void validate() const;
};

/// One ellipse of an analytic phantom in normalised [-1, 1]^2 coordinates.
struct Ellipse {
  double intensity;
  double semi_x;
  double semi_y;
  double cx;
  double cy;
  double tilt_deg;

  bool contains(double x, double y) const;
};

/// Modified (high-contrast) 10-ellipse Shepp-Logan head, values in [0, 1].
Image shepp_logan(std::size_t size);

/// Body ellipse plus n_ellipses random inserts, clipped to [0, 1].
Image random_phantom(const PhantomSpec& spec);

Image make_phantom(const PhantomSpec& spec);

/// Metric that has no defined value for its inputs (e.g. a constant label).
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// 10 log10(range^2 / mse), range taken from the label. Returns +infinity
/// when the images are identical.
double psnr(const Image& u, const Image& label);

/// Single-window SSIM over the whole image with population moments and
/// C1 = (0.01 range)^2, C2 = (0.03 range)^2.
double ssim(const Image& u, const Image& label);

struct MetricsRow {
  std::string id;
  std::string method;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

}  // namespace lact
