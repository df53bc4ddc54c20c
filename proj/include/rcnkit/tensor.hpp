#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rcnkit {

// Extents of a rank-4 tensor: (batch, channels, height, width).
struct Shape {
  int n = 0, c = 0, h = 0, w = 0;

  std::int64_t numel() const {
    return static_cast<std::int64_t>(n) * c * h * w;
  }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

// Dense float32 tensor with an optional gradient buffer. Tensor is a cheap
// shared handle; the payload is immutable once a forward pass has produced
// it (mutable_values is for initialization and the optimizer, which hold
// the single-writer role).
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& shape, bool requires_grad = false);
  static Tensor full(const Shape& shape, float value, bool requires_grad = false);
  static Tensor from_data(const Shape& shape, std::vector<float> data,
                          bool requires_grad = false);

  bool defined() const { return d_ != nullptr; }
  const Shape& shape() const { return d_->shape; }
  std::int64_t numel() const { return d_->shape.numel(); }

  std::span<const float> values() const { return d_->values; }
  std::span<float> mutable_values() { return d_->values; }

  bool requires_grad() const { return d_->requires_grad; }
  void set_requires_grad(bool rg) { d_->requires_grad = rg; }

  bool has_grad() const { return !d_->grad.empty(); }
  std::span<const float> grad() const;
  // Allocates a zero buffer on first touch so backward rules can accumulate.
  std::span<float> mutable_grad();
  void zero_grad() { d_->grad.clear(); }

  float at(int n, int c, int y, int x) const;
  float scalar() const;  // requires numel()==1
  bool all_finite() const;
  Tensor clone() const;  // deep copy of values (not grad)

  // Identity of the underlying buffer; used by Tape bookkeeping.
  const void* id() const { return d_.get(); }

 private:
  struct Data {
    Shape shape;
    std::vector<float> values;
    bool requires_grad = false;
    std::vector<float> grad;
  };
  std::shared_ptr<Data> d_;
};

// Records forward operations so gradients can be replayed in reverse.
// Single-writer: one training thread records and runs backward.
class Tape {
 public:
  // backward_fn reads output.grad() and accumulates into the inputs' grads.
  void record(std::vector<Tensor> inputs, Tensor output, std::function<void()> backward_fn);

  // Seeds d(loss)/d(loss)=1 and replays recorded rules newest-first.
  // Gradients of graph-internal tensors are reset per call; leaf tensors
  // (never an op output, e.g. parameters) accumulate across calls.
  void backward(const Tensor& loss);

  void clear() { nodes_.clear(); }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::vector<Tensor> inputs;
    Tensor output;
    std::function<void()> fn;
  };
  std::vector<Node> nodes_;
};

// Named learned parameters. Iteration is lexicographic by name, so every
// walk over the store is deterministic.
class ParameterStore {
 public:
  // Registers a requires-grad tensor; duplicate names are an error.
  Tensor create(const std::string& name, const Shape& shape);
  void add(const std::string& name, Tensor tensor);

  Tensor get(const std::string& name) const;
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }

  std::vector<std::string> names() const;
  std::size_t size() const { return entries_.size(); }
  std::int64_t total_parameters() const;

  void for_each(const std::function<void(const std::string&, Tensor&)>& fn);
  void for_each(const std::function<void(const std::string&, const Tensor&)>& fn) const;

  void zero_grads();
  // Deep copy of parameter values; velocities are not cloned.
  ParameterStore clone() const;

  std::vector<float>& velocity(const std::string& name);

 private:
  struct Entry {
    Tensor tensor;
    std::vector<float> velocity;
  };
  std::map<std::string, Entry> entries_;
};

// v <- momentum*v + grad + weight_decay*param; param <- param - lr*v.
// Zeroes all gradients afterwards. Throws if any parameter lacks a
// gradient, listing the offending names.
void sgd_step(ParameterStore& store, float lr, float momentum, float weight_decay);

// Rescales every gradient in place so the global L2 norm (over all
// parameters jointly) is at most max_norm; max_norm <= 0 disables.
// Returns the pre-clip norm.
double clip_gradients(ParameterStore& store, float max_norm);

}  // namespace rcnkit
