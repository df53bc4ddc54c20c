#include "rcnkit/maps.hpp"

#include <algorithm>

#include "rcnkit/errors.hpp"

namespace rcnkit {

Tensor image_to_tensor(const ImageU8& image) {
  if (image.h <= 0 || image.w <= 0) throw ShapeError("image_to_tensor: empty image");
  if (image.channels != 1 && image.channels != 3)
    throw ShapeError("image_to_tensor: expected 1 or 3 channels, got " +
                     std::to_string(image.channels));
  Tensor t = Tensor::zeros({1, 3, image.h, image.w});
  auto v = t.mutable_values();
  const std::size_t hw = static_cast<std::size_t>(image.h) * image.w;
  for (int c = 0; c < 3; ++c) {
    const int src_c = image.channels == 3 ? c : 0;
    for (std::size_t i = 0; i < hw; ++i)
      v[c * hw + i] = image.pixels[i * image.channels + src_c] / 255.0f;
  }
  return t;
}

Tensor label_to_tensor(const LabelMap& label) {
  if (label.h <= 0 || label.w <= 0) throw ShapeError("label_to_tensor: empty label");
  Tensor t = Tensor::zeros({1, 1, label.h, label.w});
  auto v = t.mutable_values();
  for (std::size_t i = 0; i < label.pixels.size(); ++i) v[i] = label.pixels[i] ? 1.0f : 0.0f;
  return t;
}

ContourPrediction tensor_to_prediction(const Tensor& t) {
  const Shape& s = t.shape();
  if (s.n != 1 || s.c != 1)
    throw ShapeError("tensor_to_prediction: expected 1x1xHxW, got " + s.str());
  ContourPrediction p = ContourPrediction::zeros(s.h, s.w);
  auto v = t.values();
  for (std::size_t i = 0; i < p.values.size(); ++i)
    p.values[i] = std::clamp(v[i], 0.0f, 1.0f);
  return p;
}

LabelMap binarize(const ContourPrediction& pred, float threshold) {
  LabelMap out = LabelMap::zeros(pred.h, pred.w);
  for (std::size_t i = 0; i < pred.values.size(); ++i)
    out.pixels[i] = pred.values[i] >= threshold ? 1 : 0;
  return out;
}

}  // namespace rcnkit
