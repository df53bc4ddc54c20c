#pragma once

#include "rcnkit/tensor.hpp"

namespace rcnkit::train {

struct LossConfig {
  float beta = 10.0f;  // weight on the contour class
};

// Class-weighted logistic loss, mean over pixels:
//   L = mean_i [ -y_i * beta * log(h_i) - (1 - y_i) * log(1 - h_i) ]
// with h clamped to [eps, 1-eps], eps = 1e-7, before the logarithms.
// `pred` are probabilities (post-sigmoid); `label` is a same-shape {0,1}
// tensor and receives no gradient.
Tensor weighted_logistic_loss(const Tensor& pred, const Tensor& label, const LossConfig& cfg,
                              Tape* tape);

}  // namespace rcnkit::train
