#include "lact/nn/tensor.hpp"

#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace lact::nn {

std::string Shape::str() const {
  return "(" + std::to_string(n) + "," + std::to_string(h) + "," + std::to_string(w) + "," +
         std::to_string(c) + ")";
}

Tensor Tensor::zeros(Shape s) { return constant(s, std::vector<double>(s.size(), 0.0)); }

Tensor Tensor::constant(Shape s, std::vector<double> values) {
  if (values.size() != s.size())
    throw std::invalid_argument("tensor " + s.str() + " given " + std::to_string(values.size()) +
                                " values");
  auto n = std::make_shared<detail::Node>();
  n->shape = s;
  n->value = std::move(values);
  return Tensor(std::move(n));
}

Tensor Tensor::parameter(Shape s, std::vector<double> values, std::string name) {
  Tensor t = constant(s, std::move(values));
  t.node_->requires_grad = true;
  t.node_->name = std::move(name);
  t.node_->ensure_grad();
  return t;
}

Tensor Tensor::scalar_parameter(double v, std::string name) {
  return parameter(Shape{}, {v}, std::move(name));
}

double Tensor::item() const {
  if (size() != 1) throw std::invalid_argument("item() on a tensor of shape " + shape().str());
  return node_->value[0];
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::make_result(Shape s, std::vector<double> values, const std::vector<Tensor>& parents,
                           std::function<void(detail::Node&)> backward_fn) {
  Tensor out = constant(s, std::move(values));
  bool any = false;
  for (const auto& p : parents) any = any || p.requires_grad();
  if (!any) return out;
  out.node_->requires_grad = true;
  out.node_->parents.reserve(parents.size());
  for (const auto& p : parents) out.node_->parents.push_back(p.node_);
  out.node_->backward_fn = std::move(backward_fn);
  return out;
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1)
    throw std::invalid_argument("backward: loss must be a scalar tensor");
  if (!loss.requires_grad()) return;

  // Iterative DFS producing a post-order; a grey node seen again is a cycle.
  enum class Mark { grey, black };
  std::unordered_map<detail::Node*, Mark> marks;
  std::vector<detail::Node*> order;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  marks[loss.node().get()] = Mark::grey;
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* p = node->parents[next++].get();
      if (!p->requires_grad) continue;
      const auto it = marks.find(p);
      if (it == marks.end()) {
        marks[p] = Mark::grey;
        stack.emplace_back(p, 0);
      } else if (it->second == Mark::grey) {
        throw std::logic_error("backward: cycle in tape");
      }
    } else {
      marks[node] = Mark::black;
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (!node->backward_fn || node->grad.empty()) continue;
    node->backward_fn(*node);
    // interior gradients are not needed once propagated
    if (!node->parents.empty()) std::vector<double>().swap(node->grad);
  }
}

}  // namespace lact::nn
