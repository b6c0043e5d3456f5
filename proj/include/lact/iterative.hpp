#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "lact/analytic.hpp"
#include "lact/geometry.hpp"
#include "lact/raster.hpp"

namespace lact {

/// Raised when an iterative solver produces non-finite values.
class DivergedError : public std::runtime_error {
 public:
  DivergedError(const std::string& solver, std::size_t iteration)
      : std::runtime_error(solver + " diverged at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

/// Forward differences of an image: dx along columns, dy along rows.
struct GradField {
  Array2 dx;
  Array2 dy;

  GradField() = default;
  GradField(std::size_t rows, std::size_t cols) : dx(rows, cols), dy(rows, cols) {}
};

/// Forward differences with replicate boundary; last column of dx and
/// last row of dy are zero.
GradField grad(const Image& img);

/// Negative adjoint of grad: <grad u, p> = -<u, div p>.
Image div(const GradField& p, const ImageGrid& grid);

/// Componentwise soft threshold sign(x) max(|x| - threshold, 0).
GradField shrink(const GradField& x, double threshold);

/// Anisotropic total variation: sum of |dx| + |dy|.
double total_variation(const Image& img);

struct CglsResult {
  Image image;
  std::size_t iterations = 0;
  std::vector<double> residual_norms;  // ||S W u_k - g||, k = 0..iterations
  std::vector<double> normal_norms;    // ||(S W)^T (S W u_k - g)||
};

/// Conjugate gradients on the normal equations of min ||S W u - g||^2,
/// starting from zero.
CglsResult cgls(const LimitedSinogram& g, const Geometry& geom, std::size_t max_iters,
                double tol);

struct TvParams {
  double lambda3 = 100.0;
  double rho = 0.1;
  double t5 = 0.1;
  std::size_t max_iters = 300;
  double epsilon = 1e-4;
  std::size_t inner_steps = 1;
  bool clamp_nonnegative = true;

  void validate() const;
};

struct TvResult {
  Image image;
  std::size_t iterations = 0;
  bool converged = false;
};

/// ADMM on lambda3 |grad u|_1 + ||S W u - g||^2 with a gradient-descent
/// u-step that uses FBP in place of the transposed projector.
TvResult tv_admm(const LimitedSinogram& g, const Geometry& geom, const TvParams& params,
                 const FilterSpec& filt = {});

/// FBP of the zero-padded limited data on the full geometry.
Image fbp_limited(const LimitedSinogram& g, const Geometry& geom, const FilterSpec& filt = {});

}  // namespace lact
