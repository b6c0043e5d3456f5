#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "lact/geometry.hpp"
#include "lact/raster.hpp"

namespace lact {

struct FilterSpec {
  enum class Kind { ram_lak, hann };
  Kind kind = Kind::ram_lak;
  double cutoff = 1.0;  // fraction of Nyquist, in (0, 1]

  void validate() const;
  friend bool operator==(const FilterSpec&, const FilterSpec&) = default;
};

/// Gain of the ramp filter at each bin of a length-n DFT, frequencies in
/// cycles per sample.
std::vector<double> ramp_response(std::size_t n, const FilterSpec& filt);

/// Ramp-filters one detector row, zero-padded to the next power of two
/// at least twice its length, then cropped back.
std::vector<double> apply_ramp(std::span<const double> row, const FilterSpec& filt);

/// Ramp-filters a row treated as one period of a periodic signal.
std::vector<double> apply_ramp_circular(std::span<const double> row, const FilterSpec& filt);

/// Linear filtered back-projection for a fixed geometry, with its exact
/// adjoint. Parallel geometries use ramp filtering and pi/n_angles angular
/// weight; fan geometries use the equiangular weighted formulation.
class FbpOperator {
 public:
  explicit FbpOperator(Geometry geom, FilterSpec filt = {});

  Image apply(const Sinogram& sino) const;
  Sinogram adjoint(const Image& img) const;

  const Geometry& geometry() const { return geom_; }
  const FilterSpec& filter() const { return filt_; }

 private:
  void filter_rows(Array2& rows) const;
  void backproject_parallel(const Array2& filtered, Image& out) const;
  void spread_parallel(const Image& img, Array2& out) const;
  void backproject_fan(const Array2& filtered, Image& out) const;
  void spread_fan(const Image& img, Array2& out) const;

  Geometry geom_;
  FilterSpec filt_;
  std::size_t padded_ = 0;
  std::vector<double> response_;    // real, even DFT response of length padded_
  std::vector<double> pre_weight_;  // per detector bin
};

Image fbp(const Sinogram& sino, const ParallelGeometry& geom, const FilterSpec& filt = {});
Image fbp_fan(const Sinogram& sino, const FanGeometry& geom, const FilterSpec& filt = {});

}  // namespace lact
