#include "rcnkit/augment.hpp"

#include <algorithm>
#include <cmath>

#include "rcnkit/errors.hpp"

namespace rcnkit::train {

Tensor resize_bilinear(const Tensor& image, int out_h, int out_w) {
  const Shape& is = image.shape();
  if (out_h < 1 || out_w < 1) throw ShapeError("resize_bilinear: empty target");
  Tensor out = Tensor::zeros({is.n, is.c, out_h, out_w});
  const double sy = out_h > 1 ? static_cast<double>(is.h - 1) / (out_h - 1) : 0.0;
  const double sx = out_w > 1 ? static_cast<double>(is.w - 1) / (out_w - 1) : 0.0;
  auto in = image.values();
  auto o = out.mutable_values();
  const std::size_t planes = static_cast<std::size_t>(is.n) * is.c;
  for (std::size_t p = 0; p < planes; ++p) {
    const float* ip = in.data() + p * is.h * is.w;
    float* op = o.data() + p * static_cast<std::size_t>(out_h) * out_w;
    for (int y = 0; y < out_h; ++y) {
      const double fy = y * sy;
      const int ya = std::min(static_cast<int>(fy), is.h - 1);
      const int yb = std::min(ya + 1, is.h - 1);
      const float wy = static_cast<float>(fy - ya);
      for (int x = 0; x < out_w; ++x) {
        const double fx = x * sx;
        const int xa = std::min(static_cast<int>(fx), is.w - 1);
        const int xb = std::min(xa + 1, is.w - 1);
        const float wx = static_cast<float>(fx - xa);
        const float top = ip[ya * is.w + xa] + wx * (ip[ya * is.w + xb] - ip[ya * is.w + xa]);
        const float bot = ip[yb * is.w + xa] + wx * (ip[yb * is.w + xb] - ip[yb * is.w + xa]);
        op[static_cast<std::size_t>(y) * out_w + x] = top + wy * (bot - top);
      }
    }
  }
  return out;
}

LabelMap resize_nearest(const LabelMap& label, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw ShapeError("resize_nearest: empty target");
  LabelMap out = LabelMap::zeros(out_h, out_w);
  out.source = label.source;
  out.annotator_id = label.annotator_id;
  const double sy = out_h > 1 ? static_cast<double>(label.h - 1) / (out_h - 1) : 0.0;
  const double sx = out_w > 1 ? static_cast<double>(label.w - 1) / (out_w - 1) : 0.0;
  for (int y = 0; y < out_h; ++y) {
    const int ya = std::min(static_cast<int>(std::lround(y * sy)), label.h - 1);
    for (int x = 0; x < out_w; ++x) {
      const int xa = std::min(static_cast<int>(std::lround(x * sx)), label.w - 1);
      out.set(y, x, label.at(ya, xa));
    }
  }
  return out;
}

namespace {

Tensor vflip_tensor(const Tensor& image) {
  const Shape& is = image.shape();
  Tensor out = Tensor::zeros(is);
  auto in = image.values();
  auto o = out.mutable_values();
  const std::size_t planes = static_cast<std::size_t>(is.n) * is.c;
  for (std::size_t p = 0; p < planes; ++p)
    for (int y = 0; y < is.h; ++y)
      std::copy_n(in.data() + (p * is.h + y) * is.w, is.w,
                  o.data() + (p * is.h + (is.h - 1 - y)) * is.w);
  return out;
}

Tensor hflip_tensor(const Tensor& image) {
  const Shape& is = image.shape();
  Tensor out = Tensor::zeros(is);
  auto in = image.values();
  auto o = out.mutable_values();
  const std::size_t planes = static_cast<std::size_t>(is.n) * is.c;
  for (std::size_t p = 0; p < planes; ++p)
    for (int y = 0; y < is.h; ++y)
      for (int x = 0; x < is.w; ++x)
        o[(p * is.h + y) * is.w + (is.w - 1 - x)] = in[(p * is.h + y) * is.w + x];
  return out;
}

LabelMap flip_label(const LabelMap& label, bool horizontal) {
  LabelMap out = label;
  for (int y = 0; y < label.h; ++y)
    for (int x = 0; x < label.w; ++x)
      out.set(y, x, horizontal ? label.at(y, label.w - 1 - x) : label.at(label.h - 1 - y, x));
  return out;
}

Tensor crop_tensor(const Tensor& image, int y0, int x0, int ch, int cw) {
  const Shape& is = image.shape();
  Tensor out = Tensor::zeros({is.n, is.c, ch, cw});
  auto in = image.values();
  auto o = out.mutable_values();
  const std::size_t planes = static_cast<std::size_t>(is.n) * is.c;
  for (std::size_t p = 0; p < planes; ++p)
    for (int y = 0; y < ch; ++y)
      std::copy_n(in.data() + (p * is.h + y0 + y) * is.w + x0, cw,
                  o.data() + (p * ch + y) * static_cast<std::size_t>(cw));
  return out;
}

LabelMap crop_label(const LabelMap& label, int y0, int x0, int ch, int cw) {
  LabelMap out = LabelMap::zeros(ch, cw);
  out.source = label.source;
  out.annotator_id = label.annotator_id;
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x) out.set(y, x, label.at(y0 + y, x0 + x));
  return out;
}

}  // namespace

Sample augment(const Sample& sample, const AugmentConfig& cfg, Rng& rng) {
  const Shape& is = sample.image.shape();
  if (is.h != sample.label.h || is.w != sample.label.w)
    throw ShapeError("augment: image " + is.str() + " vs label " +
                     std::to_string(sample.label.h) + "x" + std::to_string(sample.label.w));
  if (cfg.scale_lo > cfg.scale_hi)
    throw ConfigError("augment: scale_lo must not exceed scale_hi");

  // Fixed draw order: scale, flip, crop_y, crop_x.
  const double scale = rng.uniform(cfg.scale_lo, cfg.scale_hi);
  const bool flip = rng.bernoulli(cfg.vflip_prob);
  const int sh = std::max(cfg.crop_h, static_cast<int>(std::lround(is.h * scale)));
  const int sw = std::max(cfg.crop_w, static_cast<int>(std::lround(is.w * scale)));

  Sample out;
  out.annotator_id = sample.annotator_id;
  out.image = sh == is.h && sw == is.w ? sample.image : resize_bilinear(sample.image, sh, sw);
  out.label = sh == is.h && sw == is.w ? sample.label : resize_nearest(sample.label, sh, sw);
  if (flip) {
    out.image = cfg.horizontal_flip ? hflip_tensor(out.image) : vflip_tensor(out.image);
    out.label = flip_label(out.label, cfg.horizontal_flip);
  }
  const int y0 = rng.uniform_int(0, sh - cfg.crop_h);
  const int x0 = rng.uniform_int(0, sw - cfg.crop_w);
  if (sh != cfg.crop_h || sw != cfg.crop_w) {
    out.image = crop_tensor(out.image, y0, x0, cfg.crop_h, cfg.crop_w);
    out.label = crop_label(out.label, y0, x0, cfg.crop_h, cfg.crop_w);
  }
  return out;
}

}  // namespace rcnkit::train
