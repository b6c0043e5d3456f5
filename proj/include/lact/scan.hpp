#pragma once

#include <cstddef>

#include "lact/config.hpp"
#include "lact/geometry.hpp"

namespace lact {

/// Serialisable description of a square grid, a full scan and the kept
/// views. Zero-valued optional fields select size-dependent defaults.
struct ScanSpec {
  enum class Kind { parallel, fan };
  Kind kind = Kind::parallel;
  std::size_t size = 128;
  std::size_t views = 180;
  std::size_t keep = 150;
  std::size_t detectors = 0;        // parallel; 0 -> 2 ceil(circumradius) + 3
  double source_radius = 0.0;       // fan; 0 -> 4 size
  double fan_half_angle_deg = 0.0;  // fan; 0 -> just covers the grid, plus 1 degree
  double detector_step_deg = 0.1;   // fan

  void validate() const;
  ImageGrid grid() const;
  Geometry geometry() const;
  ViewSelection selection() const;

  /// Keys: geometry, size, views, keep, detectors, source_radius,
  /// fan_half_angle_deg, detector_step_deg.
  KeyValues to_key_values() const;
  /// Reads the scan keys of kv, leaving others alone; missing keys keep
  /// the values of base.
  static ScanSpec from_key_values(const KeyValues& kv, const ScanSpec& base);
  static ScanSpec from_key_values(const KeyValues& kv);
  static const std::set<std::string>& keys();
};

}  // namespace lact
