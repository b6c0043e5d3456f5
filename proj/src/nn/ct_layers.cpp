#include "lact/nn/ct_layers.hpp"

#include <algorithm>
#include <stdexcept>

#include "lact/projector.hpp"

namespace lact::nn {

namespace {

using detail::Node;

void require_planes(const Tensor& x, std::size_t h, std::size_t w, const char* op) {
  const Shape& s = x.shape();
  if (s.c != 1 || s.h != h || s.w != w)
    throw std::invalid_argument(std::string(op) + ": expected (b," + std::to_string(h) + "," +
                                std::to_string(w) + ",1), got " + s.str());
}

Array2 plane_of(std::span<const double> v, std::size_t b, std::size_t h, std::size_t w) {
  const auto first = v.begin() + static_cast<std::ptrdiff_t>(b * h * w);
  return Array2(h, w, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(h * w)));
}

void add_plane(std::vector<double>& dst, std::size_t b, const Array2& src) {
  const auto s = src.flat();
  double* d = dst.data() + b * s.size();
  for (std::size_t i = 0; i < s.size(); ++i) d[i] += s[i];
}

}  // namespace

Tensor array_batch(const std::vector<Array2>& arrays) {
  if (arrays.empty()) throw std::invalid_argument("array_batch: empty batch");
  const std::size_t h = arrays.front().rows();
  const std::size_t w = arrays.front().cols();
  std::vector<double> out;
  out.reserve(arrays.size() * h * w);
  for (const auto& a : arrays) {
    if (a.rows() != h || a.cols() != w)
      throw std::invalid_argument("array_batch: entries differ in shape");
    out.insert(out.end(), a.flat().begin(), a.flat().end());
  }
  return Tensor::constant(Shape{arrays.size(), h, w, 1}, std::move(out));
}

Tensor image_batch(const std::vector<Image>& images) {
  std::vector<Array2> arrays;
  arrays.reserve(images.size());
  for (const auto& img : images) arrays.push_back(img.values);
  return array_batch(arrays);
}

Array2 plane(const Tensor& x, std::size_t b) {
  const Shape& s = x.shape();
  if (s.c != 1 || b >= s.n) throw std::out_of_range("plane: index outside " + s.str());
  return plane_of(x.values(), b, s.h, s.w);
}

Image image_at(const Tensor& x, std::size_t b, const ImageGrid& grid) {
  require_planes(x, grid.height, grid.width, "image_at");
  return Image(grid, plane(x, b));
}

Tensor project_layer(const Tensor& images, const Geometry& geom) {
  const ImageGrid& grid = grid_of(geom);
  require_planes(images, grid.height, grid.width, "project_layer");
  const std::size_t nb = images.shape().n;
  const std::size_t na = n_angles(geom);
  const std::size_t nd = n_detectors(geom);
  std::vector<double> out;
  out.reserve(nb * na * nd);
  for (std::size_t b = 0; b < nb; ++b) {
    const Sinogram s = project(Image(grid, plane(images, b)), geom);
    out.insert(out.end(), s.values.flat().begin(), s.values.flat().end());
  }
  return Tensor::make_result(Shape{nb, na, nd, 1}, std::move(out), {images},
                             [geom, nb, na, nd](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t b = 0; b < nb; ++b)
      add_plane(g, b, backproject(Sinogram(plane_of(self.grad, b, na, nd)), geom).values);
  });
}

Tensor restrict_layer(const Tensor& sinos, const ViewSelection& sel) {
  sel.validate();
  const Shape s = sinos.shape();
  if (s.c != 1 || s.h != sel.n_full_views)
    throw std::invalid_argument("restrict_layer: input " + s.str() + " does not have " +
                                std::to_string(sel.n_full_views) + " views");
  const std::size_t nd = s.w;
  const std::size_t nk = sel.size();
  std::vector<double> out(s.n * nk * nd);
  const auto v = sinos.values();
  for (std::size_t b = 0; b < s.n; ++b)
    for (std::size_t r = 0; r < nk; ++r)
      std::copy_n(v.begin() + static_cast<std::ptrdiff_t>((b * s.h + sel.selected[r]) * nd), nd,
                  out.begin() + static_cast<std::ptrdiff_t>((b * nk + r) * nd));
  return Tensor::make_result(Shape{s.n, nk, nd, 1}, std::move(out), {sinos},
                             [s, sel, nk, nd](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t b = 0; b < s.n; ++b)
      for (std::size_t r = 0; r < nk; ++r)
        for (std::size_t d = 0; d < nd; ++d)
          g[(b * s.h + sel.selected[r]) * nd + d] += self.grad[(b * nk + r) * nd + d];
  });
}

Tensor pad_layer(const Tensor& limited, const ViewSelection& sel) {
  sel.validate();
  const Shape s = limited.shape();
  if (s.c != 1 || s.h != sel.size())
    throw std::invalid_argument("pad_layer: input " + s.str() + " does not have " +
                                std::to_string(sel.size()) + " views");
  const std::size_t nd = s.w;
  const std::size_t nf = sel.n_full_views;
  std::vector<double> out(s.n * nf * nd, 0.0);
  const auto v = limited.values();
  for (std::size_t b = 0; b < s.n; ++b)
    for (std::size_t r = 0; r < s.h; ++r)
      std::copy_n(v.begin() + static_cast<std::ptrdiff_t>((b * s.h + r) * nd), nd,
                  out.begin() + static_cast<std::ptrdiff_t>((b * nf + sel.selected[r]) * nd));
  return Tensor::make_result(Shape{s.n, nf, nd, 1}, std::move(out), {limited},
                             [s, sel, nf, nd](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t b = 0; b < s.n; ++b)
      for (std::size_t r = 0; r < s.h; ++r)
        for (std::size_t d = 0; d < nd; ++d)
          g[(b * s.h + r) * nd + d] += self.grad[(b * nf + sel.selected[r]) * nd + d];
  });
}

Tensor fbp_layer(const Tensor& sinos, std::shared_ptr<const FbpOperator> op) {
  if (!op) throw std::invalid_argument("fbp_layer: null operator");
  const Geometry& geom = op->geometry();
  const ImageGrid& grid = grid_of(geom);
  const std::size_t na = n_angles(geom);
  const std::size_t nd = n_detectors(geom);
  require_planes(sinos, na, nd, "fbp_layer");
  const std::size_t nb = sinos.shape().n;
  std::vector<double> out;
  out.reserve(nb * grid.pixel_count());
  for (std::size_t b = 0; b < nb; ++b) {
    const Image img = op->apply(Sinogram(plane(sinos, b)));
    out.insert(out.end(), img.values.flat().begin(), img.values.flat().end());
  }
  return Tensor::make_result(Shape{nb, grid.height, grid.width, 1}, std::move(out), {sinos},
                             [op, grid, nb](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t b = 0; b < nb; ++b) {
      const Image seed(grid, plane_of(self.grad, b, grid.height, grid.width));
      add_plane(g, b, op->adjoint(seed).values);
    }
  });
}

}  // namespace lact::nn
