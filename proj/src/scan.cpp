#include "lact/scan.hpp"

#include <cmath>
#include <numbers>

#include "lact/io.hpp"

namespace lact {

void ScanSpec::validate() const {
  if (size < 8) throw ConfigError("scan: size must be at least 8");
  if (views == 0) throw ConfigError("scan: views must be positive");
  if (keep == 0 || keep > views)
    throw ConfigError("scan: keep (" + std::to_string(keep) + ") must lie in [1, views (" +
                      std::to_string(views) + ")]");
  if (kind == Kind::fan) {
    if (source_radius < 0.0 || fan_half_angle_deg < 0.0 || !(detector_step_deg > 0.0))
      throw ConfigError("scan: fan parameters must be positive");
    if (fan_half_angle_deg >= 90.0) throw ConfigError("scan: fan half angle must be below 90 degrees");
  }
}

ImageGrid ScanSpec::grid() const { return ImageGrid{size, size, 1.0}; }

Geometry ScanSpec::geometry() const {
  validate();
  const ImageGrid g = grid();
  if (kind == Kind::parallel) {
    const std::size_t nd =
        detectors > 0 ? detectors
                      : 2 * static_cast<std::size_t>(std::ceil(g.circumradius())) + 3;
    return make_parallel(g, views, nd);
  }
  const double radius = source_radius > 0.0 ? source_radius : 4.0 * static_cast<double>(size);
  double half_deg = fan_half_angle_deg;
  if (half_deg == 0.0) {
    if (radius <= g.circumradius())
      throw ConfigError("scan: source radius lies inside the grid's circumcircle");
    half_deg = std::ceil(std::asin(g.circumradius() / radius) * 180.0 / std::numbers::pi) + 1.0;
  }
  constexpr double rad = std::numbers::pi / 180.0;
  try {
    return make_fan(g, views, radius, half_deg * rad, detector_step_deg * rad);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scan: ") + e.what());
  }
}

ViewSelection ScanSpec::selection() const {
  validate();
  return make_limited(views, keep);
}

KeyValues ScanSpec::to_key_values() const {
  return {
      {"geometry", kind == Kind::parallel ? "parallel" : "fan"},
      {"size", std::to_string(size)},
      {"views", std::to_string(views)},
      {"keep", std::to_string(keep)},
      {"detectors", std::to_string(detectors)},
      {"source_radius", io::format_double(source_radius)},
      {"fan_half_angle_deg", io::format_double(fan_half_angle_deg)},
      {"detector_step_deg", io::format_double(detector_step_deg)},
  };
}

ScanSpec ScanSpec::from_key_values(const KeyValues& kv, const ScanSpec& base) {
  ScanSpec s = base;
  const std::string kind = get_string(kv, "geometry", base.kind == Kind::parallel ? "parallel" : "fan");
  if (kind == "parallel")
    s.kind = Kind::parallel;
  else if (kind == "fan")
    s.kind = Kind::fan;
  else
    throw ConfigError("setting 'geometry': expected parallel or fan, got '" + kind + "'");
  s.size = get_size(kv, "size", base.size);
  s.views = get_size(kv, "views", base.views);
  s.keep = get_size(kv, "keep", base.keep);
  s.detectors = get_size(kv, "detectors", base.detectors);
  s.source_radius = get_double(kv, "source_radius", base.source_radius);
  s.fan_half_angle_deg = get_double(kv, "fan_half_angle_deg", base.fan_half_angle_deg);
  s.detector_step_deg = get_double(kv, "detector_step_deg", base.detector_step_deg);
  s.validate();
  return s;
}

ScanSpec ScanSpec::from_key_values(const KeyValues& kv) { return from_key_values(kv, ScanSpec{}); }

const std::set<std::string>& ScanSpec::keys() {
  static const std::set<std::string> k{"geometry", "size",          "views",
                                       "keep",     "detectors",     "source_radius",
                                       "fan_half_angle_deg", "detector_step_deg"};
  return k;
}

}  // namespace lact
