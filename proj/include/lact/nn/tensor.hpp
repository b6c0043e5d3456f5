#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lact::nn {

/// Four-axis shape. Activations use (batch, height, width, channels);
/// convolution filters reuse the slots as (kh, kw, in, out).
struct Shape {
  std::size_t n = 1;
  std::size_t h = 1;
  std::size_t w = 1;
  std::size_t c = 1;

  std::size_t size() const { return n * h * w * c; }
  std::string str() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until something flows into it
  bool requires_grad = false;
  std::string name;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  std::vector<double>& ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

/// Handle to a value on the gradient tape. Copies share storage.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape s);
  static Tensor constant(Shape s, std::vector<double> values);
  /// Leaf that accumulates gradients.
  static Tensor parameter(Shape s, std::vector<double> values, std::string name = {});
  static Tensor scalar_parameter(double v, std::string name = {});

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }
  const std::string& name() const { return node_->name; }

  std::span<const double> values() const { return node_->value; }
  /// Writable values; intended for leaves (parameter updates, test probes).
  std::span<double> mutable_values() { return node_->value; }
  double item() const;

  /// Accumulated gradient; zeros if nothing reached this tensor.
  std::span<const double> grad() const { return node_->ensure_grad(); }
  std::span<double> mutable_grad() { return node_->ensure_grad(); }
  void zero_grad();

  /// Output of a taped operation. Parents that do not require gradients are
  /// not recorded; with no such parent the result is a plain constant.
  static Tensor make_result(Shape s, std::vector<double> values, const std::vector<Tensor>& parents,
                            std::function<void(detail::Node&)> backward_fn);

  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<detail::Node> node_;
};

/// Reverse-mode sweep from a scalar loss. Leaf gradients accumulate.
void backward(const Tensor& loss);

}  // namespace lact::nn
