#include "rcnkit/tensor.hpp"

#include <cmath>
#include <unordered_set>

#include "rcnkit/errors.hpp"

namespace rcnkit {

std::string Shape::str() const {
  return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" +
         std::to_string(w);
}

namespace {

void check_shape(const Shape& s) {
  if (s.n <= 0 || s.c <= 0 || s.h <= 0 || s.w <= 0)
    throw ShapeError("tensor: all extents must be positive, got " + s.str());
}

}  // namespace

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
  check_shape(shape);
  Tensor t;
  t.d_ = std::make_shared<Data>();
  t.d_->shape = shape;
  t.d_->values.assign(static_cast<std::size_t>(shape.numel()), 0.0f);
  t.d_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::full(const Shape& shape, float value, bool requires_grad) {
  Tensor t = zeros(shape, requires_grad);
  for (auto& v : t.d_->values) v = value;
  return t;
}

Tensor Tensor::from_data(const Shape& shape, std::vector<float> data, bool requires_grad) {
  check_shape(shape);
  if (static_cast<std::int64_t>(data.size()) != shape.numel())
    throw ShapeError("tensor: data length " + std::to_string(data.size()) +
                     " does not match shape " + shape.str());
  Tensor t;
  t.d_ = std::make_shared<Data>();
  t.d_->shape = shape;
  t.d_->values = std::move(data);
  t.d_->requires_grad = requires_grad;
  return t;
}

std::span<const float> Tensor::grad() const {
  if (d_->grad.empty())
    throw Error("tensor: gradient requested but none has been accumulated");
  return d_->grad;
}

std::span<float> Tensor::mutable_grad() {
  if (d_->grad.empty()) d_->grad.assign(d_->values.size(), 0.0f);
  return d_->grad;
}

float Tensor::at(int n, int c, int y, int x) const {
  const Shape& s = d_->shape;
  return d_->values[((static_cast<std::size_t>(n) * s.c + c) * s.h + y) * s.w + x];
}

float Tensor::scalar() const {
  if (numel() != 1)
    throw ShapeError("tensor: scalar() requires a single element, shape is " + shape().str());
  return d_->values[0];
}

bool Tensor::all_finite() const {
  for (float v : d_->values)
    if (!std::isfinite(v)) return false;
  return true;
}

Tensor Tensor::clone() const {
  Tensor t;
  t.d_ = std::make_shared<Data>();
  t.d_->shape = d_->shape;
  t.d_->values = d_->values;
  t.d_->requires_grad = d_->requires_grad;
  return t;
}

void Tape::record(std::vector<Tensor> inputs, Tensor output, std::function<void()> backward_fn) {
  nodes_.push_back(Node{std::move(inputs), std::move(output), std::move(backward_fn)});
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1)
    throw ShapeError("backward: loss must be a scalar tensor");
  if (nodes_.empty()) throw Error("backward: tape is empty");

  // Graph-internal gradients are scratch state for this replay; leaves
  // (parameters) keep accumulating across calls.
  for (auto& node : nodes_) {
    Tensor out = node.output;
    if (out.has_grad()) {
      auto g = out.mutable_grad();
      std::fill(g.begin(), g.end(), 0.0f);
    }
  }
  Tensor seed = loss;
  seed.mutable_grad()[0] += 1.0f;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->output.has_grad()) it->fn();
  }
}

Tensor ParameterStore::create(const std::string& name, const Shape& shape) {
  Tensor t = Tensor::zeros(shape, /*requires_grad=*/true);
  add(name, t);
  return t;
}

void ParameterStore::add(const std::string& name, Tensor tensor) {
  if (entries_.count(name) != 0)
    throw Error("parameter store: duplicate name '" + name + "'");
  if (!tensor.defined()) throw Error("parameter store: undefined tensor for '" + name + "'");
  tensor.set_requires_grad(true);
  entries_[name] = Entry{std::move(tensor), {}};
}

Tensor ParameterStore::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw Error("parameter store: unknown name '" + name + "'");
  return it->second.tensor;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& kv : entries_) out.push_back(kv.first);
  return out;
}

std::int64_t ParameterStore::total_parameters() const {
  std::int64_t total = 0;
  for (const auto& kv : entries_) total += kv.second.tensor.numel();
  return total;
}

void ParameterStore::for_each(const std::function<void(const std::string&, Tensor&)>& fn) {
  for (auto& kv : entries_) fn(kv.first, kv.second.tensor);
}

void ParameterStore::for_each(
    const std::function<void(const std::string&, const Tensor&)>& fn) const {
  for (const auto& kv : entries_) fn(kv.first, kv.second.tensor);
}

void ParameterStore::zero_grads() {
  for (auto& kv : entries_) kv.second.tensor.zero_grad();
}

ParameterStore ParameterStore::clone() const {
  ParameterStore out;
  for (const auto& kv : entries_) out.add(kv.first, kv.second.tensor.clone());
  return out;
}

std::vector<float>& ParameterStore::velocity(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw Error("parameter store: unknown name '" + name + "'");
  return it->second.velocity;
}

void sgd_step(ParameterStore& store, float lr, float momentum, float weight_decay) {
  std::string missing;
  store.for_each([&](const std::string& name, const Tensor& t) {
    if (!t.has_grad()) missing += missing.empty() ? name : ", " + name;
  });
  if (!missing.empty())
    throw Error("sgd_step: parameters without gradients: " + missing);

  store.for_each([&](const std::string& name, Tensor& t) {
    auto values = t.mutable_values();
    auto grads = t.grad();
    auto& vel = store.velocity(name);
    if (vel.size() != values.size()) vel.assign(values.size(), 0.0f);
    for (std::size_t i = 0; i < values.size(); ++i) {
      float v = momentum * vel[i] + grads[i] + weight_decay * values[i];
      vel[i] = v;
      values[i] -= lr * v;
    }
    t.zero_grad();
  });
}

double clip_gradients(ParameterStore& store, float max_norm) {
  double sq = 0.0;
  store.for_each([&](const std::string&, const Tensor& t) {
    if (!t.has_grad()) return;
    for (float g : t.grad()) sq += static_cast<double>(g) * g;
  });
  const double norm = std::sqrt(sq);
  if (max_norm <= 0.0f || norm <= max_norm) return norm;
  const float scale = static_cast<float>(max_norm / norm);
  store.for_each([&](const std::string&, Tensor& t) {
    if (!t.has_grad()) return;
    for (float& g : t.mutable_grad()) g *= scale;
  });
  return norm;
}

}  // namespace rcnkit
