#include "rcnkit/loss.hpp"

#include <algorithm>
#include <cmath>

#include "rcnkit/errors.hpp"

namespace rcnkit::train {

namespace {
constexpr float kEps = 1e-7f;  // probability clamp inside the log terms
}

Tensor weighted_logistic_loss(const Tensor& pred, const Tensor& label, const LossConfig& cfg,
                              Tape* tape) {
  if (!(pred.shape() == label.shape()))
    throw ShapeError("loss: prediction " + pred.shape().str() + " vs label " +
                     label.shape().str());
  if (!(cfg.beta > 0.0f)) throw ConfigError("loss: beta must be positive");
  const float beta = cfg.beta;
  auto h = pred.values();
  auto y = label.values();
  const std::int64_t n = pred.numel();

  double acc = 0.0;  // per-pixel terms reduced in double to keep the mean stable
  for (std::int64_t i = 0; i < n; ++i) {
    const double hc = std::clamp(h[i], kEps, 1.0f - kEps);
    acc -= y[i] > 0.5f ? beta * std::log(hc) : std::log(1.0 - hc);
  }
  Tensor out = Tensor::from_data({1, 1, 1, 1}, {static_cast<float>(acc / n)});

  if (tape != nullptr && pred.requires_grad()) {
    out.set_requires_grad(true);
    Tensor pred_t = pred, label_t = label, out_t = out;
    tape->record({pred, label}, out, [pred_t, label_t, out_t, beta]() mutable {
      const float g = out_t.grad()[0];
      auto h = pred_t.values();
      auto y = label_t.values();
      float* gp = pred_t.mutable_grad().data();
      const std::int64_t n = pred_t.numel();
      const float inv_n = 1.0f / n;
      for (std::int64_t i = 0; i < n; ++i) {
        const float hc = std::clamp(h[i], kEps, 1.0f - kEps);
        const float d = y[i] > 0.5f ? -beta / hc : 1.0f / (1.0f - hc);
        gp[i] += g * d * inv_n;
      }
    });
  }
  return out;
}

}  // namespace rcnkit::train
