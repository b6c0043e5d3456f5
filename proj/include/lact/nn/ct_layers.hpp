#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "lact/analytic.hpp"
#include "lact/geometry.hpp"
#include "lact/nn/tensor.hpp"
#include "lact/raster.hpp"

namespace lact::nn {

/// Stacks images on the batch axis: (b, height, width, 1).
Tensor image_batch(const std::vector<Image>& images);
/// Stacks sinogram-shaped arrays on the batch axis: (b, rows, cols, 1).
Tensor array_batch(const std::vector<Array2>& arrays);
/// Plane b of a (b, h, w, 1) tensor.
Array2 plane(const Tensor& x, std::size_t b);
Image image_at(const Tensor& x, std::size_t b, const ImageGrid& grid);

/// W, with backproject as its vector-Jacobian product.
Tensor project_layer(const Tensor& images, const Geometry& geom);
/// S: (b, full views, dets, 1) -> (b, selected views, dets, 1).
Tensor restrict_layer(const Tensor& sinos, const ViewSelection& sel);
/// S*: the transpose of restrict_layer.
Tensor pad_layer(const Tensor& limited, const ViewSelection& sel);
/// R^-1, backed by FbpOperator::adjoint.
Tensor fbp_layer(const Tensor& sinos, std::shared_ptr<const FbpOperator> op);

}  // namespace lact::nn
