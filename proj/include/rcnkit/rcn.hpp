#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rcnkit/maps.hpp"
#include "rcnkit/net_spec.hpp"
#include "rcnkit/tensor.hpp"

namespace rcnkit::graph {

// Intermediate tensors captured during a forward pass (for tests and
// debugging; empty unless requested).
struct ForwardTrace {
  std::vector<Tensor> backbone;  // four stage outputs, shallow to deep
  std::vector<Tensor> fused;     // refinement output after each fusion step
  Tensor image_path;
  Tensor output;
};

// Every (name, shape) pair the network owns, in construction order.
std::vector<std::pair<std::string, Shape>> parameter_plan(const NetworkSpec& spec);

class RcnModel {
 public:
  // Fresh parameters: conv weights fan-in-scaled Gaussian (std
  // sqrt(2/fan_in)), biases and shifts zero, scales one.
  RcnModel(const NetworkSpec& spec, std::uint64_t seed);
  // Adopts existing parameters; throws ConfigError when names or shapes
  // disagree with the spec's plan.
  RcnModel(const NetworkSpec& spec, ParameterStore params);

  const NetworkSpec& spec() const { return spec_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  // (image01 - mean) / scale per channel; input in [0,1].
  Tensor normalize(const Tensor& image01) const;

  // Probability map at the declared output scale. Input must be a
  // normalized 1x3xHxW tensor with H, W >= 32.
  Tensor forward(const Tensor& input, Tape* tape, ForwardTrace* trace = nullptr,
                 bool check_finite = false) const;

  // forward(), bilinearly upsampled back to the input resolution when
  // output_scale is half (differentiable; used by the training loss).
  Tensor forward_upsampled(const Tensor& input, Tape* tape) const;

  // Full inference path: [0,1] conversion, normalization, forward with
  // finiteness checks, upsampling to image resolution.
  ContourPrediction predict(const ImageU8& image) const;

 private:
  NetworkSpec spec_;
  ParameterStore params_;
};

}  // namespace rcnkit::graph
