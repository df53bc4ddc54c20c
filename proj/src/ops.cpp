#include "rcnkit/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "rcnkit/errors.hpp"

namespace rcnkit {
namespace {

bool needs_grad(std::initializer_list<const Tensor*> inputs) {
  for (const Tensor* t : inputs)
    if (t->defined() && t->requires_grad()) return true;
  return false;
}

// Valid output range for one kernel tap: indices o with
// 0 <= o*stride - padding + k < extent.
struct TapRange {
  int lo, hi;  // [lo, hi)
};

TapRange tap_range(int out_extent, int in_extent, int stride, int padding, int k) {
  int lo = 0;
  if (padding > k) lo = (padding - k + stride - 1) / stride;
  int last_in = in_extent - 1 + padding - k;
  int hi = last_in < 0 ? 0 : std::min(out_extent, last_in / stride + 1);
  if (hi < lo) hi = lo;
  return {lo, hi};
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
              int padding, Tape* tape) {
  if (stride < 1) throw ShapeError("conv2d: stride must be >= 1");
  if (padding < 0) throw ShapeError("conv2d: padding must be >= 0");
  const Shape& is = input.shape();
  const Shape& ws = weight.shape();
  if (is.c != ws.c)
    throw ShapeError("conv2d: input channels (" + std::to_string(is.c) +
                     ") != weight in_channels (" + std::to_string(ws.c) + ")");
  if (bias.defined()) {
    const Shape want{1, ws.n, 1, 1};
    if (!(bias.shape() == want))
      throw ShapeError("conv2d: bias shape " + bias.shape().str() + " != " + want.str());
  }
  const int oh = (is.h + 2 * padding - ws.h) / stride + 1;
  const int ow = (is.w + 2 * padding - ws.w) / stride + 1;
  if (is.h + 2 * padding < ws.h || is.w + 2 * padding < ws.w)
    throw ShapeError("conv2d: kernel " + std::to_string(ws.h) + "x" + std::to_string(ws.w) +
                     " exceeds padded input " + std::to_string(is.h + 2 * padding) + "x" +
                     std::to_string(is.w + 2 * padding));

  Tensor out = Tensor::zeros({is.n, ws.n, oh, ow});
  const float* in = input.values().data();
  const float* wt = weight.values().data();
  float* o = out.mutable_values().data();

  const TapRange* rh = nullptr;
  const TapRange* rw = nullptr;
  std::vector<TapRange> ranges_h(static_cast<std::size_t>(ws.h));
  std::vector<TapRange> ranges_w(static_cast<std::size_t>(ws.w));
  for (int k = 0; k < ws.h; ++k) ranges_h[k] = tap_range(oh, is.h, stride, padding, k);
  for (int k = 0; k < ws.w; ++k) ranges_w[k] = tap_range(ow, is.w, stride, padding, k);
  rh = ranges_h.data();
  rw = ranges_w.data();

  for (int n = 0; n < is.n; ++n) {
    for (int oc = 0; oc < ws.n; ++oc) {
      float* oplane = o + (static_cast<std::size_t>(n) * ws.n + oc) * oh * ow;
      if (bias.defined()) {
        const float b = bias.values()[static_cast<std::size_t>(oc)];
        std::fill(oplane, oplane + static_cast<std::size_t>(oh) * ow, b);
      }
      for (int ic = 0; ic < is.c; ++ic) {
        const float* iplane = in + (static_cast<std::size_t>(n) * is.c + ic) * is.h * is.w;
        const float* wplane = wt + (static_cast<std::size_t>(oc) * is.c + ic) * ws.h * ws.w;
        for (int kh = 0; kh < ws.h; ++kh) {
          for (int kw = 0; kw < ws.w; ++kw) {
            const float wv = wplane[kh * ws.w + kw];
            for (int y = rh[kh].lo; y < rh[kh].hi; ++y) {
              const int iy = y * stride - padding + kh;
              const float* irow = iplane + static_cast<std::size_t>(iy) * is.w - padding + kw;
              float* orow = oplane + static_cast<std::size_t>(y) * ow;
              if (stride == 1) {
                for (int x = rw[kw].lo; x < rw[kw].hi; ++x) orow[x] += wv * irow[x];
              } else {
                for (int x = rw[kw].lo; x < rw[kw].hi; ++x) orow[x] += wv * irow[x * stride];
              }
            }
          }
        }
      }
    }
  }

  if (tape != nullptr && needs_grad({&input, &weight, &bias})) {
    out.set_requires_grad(true);
    Tensor in_t = input, w_t = weight, b_t = bias, out_t = out;
    const int str = stride, pad = padding;
    tape->record(
        {input, weight, bias.defined() ? bias : Tensor()}, out,
        [in_t, w_t, b_t, out_t, str, pad, ranges_h, ranges_w]() mutable {
          const Shape& is = in_t.shape();
          const Shape& ws = w_t.shape();
          const Shape& os = out_t.shape();
          const float* g = out_t.grad().data();
          const float* in = in_t.values().data();
          const float* wt = w_t.values().data();

          if (b_t.defined() && b_t.requires_grad()) {
            float* gb = b_t.mutable_grad().data();
            for (int n = 0; n < os.n; ++n)
              for (int oc = 0; oc < os.c; ++oc) {
                const float* gplane = g + (static_cast<std::size_t>(n) * os.c + oc) * os.h * os.w;
                float acc = 0.0f;
                for (std::int64_t i = 0; i < static_cast<std::int64_t>(os.h) * os.w; ++i)
                  acc += gplane[i];
                gb[oc] += acc;
              }
          }

          if (w_t.requires_grad()) {
            float* gw = w_t.mutable_grad().data();
            for (int n = 0; n < os.n; ++n)
              for (int oc = 0; oc < ws.n; ++oc) {
                const float* gplane = g + (static_cast<std::size_t>(n) * os.c + oc) * os.h * os.w;
                for (int ic = 0; ic < is.c; ++ic) {
                  const float* iplane =
                      in + (static_cast<std::size_t>(n) * is.c + ic) * is.h * is.w;
                  float* gwplane = gw + (static_cast<std::size_t>(oc) * is.c + ic) * ws.h * ws.w;
                  for (int kh = 0; kh < ws.h; ++kh)
                    for (int kw = 0; kw < ws.w; ++kw) {
                      float acc = 0.0f;
                      for (int y = ranges_h[kh].lo; y < ranges_h[kh].hi; ++y) {
                        const int iy = y * str - pad + kh;
                        const float* irow =
                            iplane + static_cast<std::size_t>(iy) * is.w - pad + kw;
                        const float* grow = gplane + static_cast<std::size_t>(y) * os.w;
                        if (str == 1) {
                          for (int x = ranges_w[kw].lo; x < ranges_w[kw].hi; ++x)
                            acc += grow[x] * irow[x];
                        } else {
                          for (int x = ranges_w[kw].lo; x < ranges_w[kw].hi; ++x)
                            acc += grow[x] * irow[x * str];
                        }
                      }
                      gwplane[kh * ws.w + kw] += acc;
                    }
                }
              }
          }

          if (in_t.requires_grad()) {
            float* gi = in_t.mutable_grad().data();
            for (int n = 0; n < os.n; ++n)
              for (int oc = 0; oc < ws.n; ++oc) {
                const float* gplane = g + (static_cast<std::size_t>(n) * os.c + oc) * os.h * os.w;
                for (int ic = 0; ic < is.c; ++ic) {
                  float* giplane = gi + (static_cast<std::size_t>(n) * is.c + ic) * is.h * is.w;
                  const float* wplane =
                      wt + (static_cast<std::size_t>(oc) * is.c + ic) * ws.h * ws.w;
                  for (int kh = 0; kh < ws.h; ++kh)
                    for (int kw = 0; kw < ws.w; ++kw) {
                      const float wv = wplane[kh * ws.w + kw];
                      for (int y = ranges_h[kh].lo; y < ranges_h[kh].hi; ++y) {
                        const int iy = y * str - pad + kh;
                        float* girow = giplane + static_cast<std::size_t>(iy) * is.w - pad + kw;
                        const float* grow = gplane + static_cast<std::size_t>(y) * os.w;
                        if (str == 1) {
                          for (int x = ranges_w[kw].lo; x < ranges_w[kw].hi; ++x)
                            girow[x] += wv * grow[x];
                        } else {
                          for (int x = ranges_w[kw].lo; x < ranges_w[kw].hi; ++x)
                            girow[x * str] += wv * grow[x];
                        }
                      }
                    }
                }
              }
          }
        });
  }
  return out;
}

Tensor max_pool(const Tensor& input, int kernel, int stride, int padding, Tape* tape) {
  if (kernel < 1) throw ShapeError("max_pool: kernel must be >= 1");
  if (stride < 1) throw ShapeError("max_pool: stride must be >= 1");
  // padding >= kernel would allow windows made entirely of -inf padding.
  if (padding < 0 || padding >= kernel)
    throw ShapeError("max_pool: padding must be in [0, kernel)");
  const Shape& is = input.shape();
  if (is.h + 2 * padding < kernel || is.w + 2 * padding < kernel)
    throw ShapeError("max_pool: window " + std::to_string(kernel) + " exceeds padded input " +
                     std::to_string(is.h + 2 * padding) + "x" +
                     std::to_string(is.w + 2 * padding));

  const int oh = (is.h + 2 * padding - kernel) / stride + 1;
  const int ow = (is.w + 2 * padding - kernel) / stride + 1;
  Tensor out = Tensor::zeros({is.n, is.c, oh, ow});
  const float* in = input.values().data();
  float* o = out.mutable_values().data();
  // Flat input index of the selected cell per output cell.
  std::vector<std::int32_t> argmax(static_cast<std::size_t>(out.numel()), -1);

  std::size_t oi = 0;
  for (int n = 0; n < is.n; ++n)
    for (int c = 0; c < is.c; ++c) {
      const std::size_t plane = (static_cast<std::size_t>(n) * is.c + c) * is.h * is.w;
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x, ++oi) {
          float best = -std::numeric_limits<float>::infinity();
          std::int32_t best_idx = -1;
          const int y0 = y * stride - padding;
          const int x0 = x * stride - padding;
          for (int ky = 0; ky < kernel; ++ky) {
            const int iy = y0 + ky;
            if (iy < 0 || iy >= is.h) continue;
            for (int kx = 0; kx < kernel; ++kx) {
              const int ix = x0 + kx;
              if (ix < 0 || ix >= is.w) continue;
              const float v = in[plane + static_cast<std::size_t>(iy) * is.w + ix];
              if (v > best) {  // strict: first occurrence wins on ties
                best = v;
                best_idx = static_cast<std::int32_t>(plane + static_cast<std::size_t>(iy) * is.w +
                                                     ix);
              }
            }
          }
          o[oi] = best;
          argmax[oi] = best_idx;
        }
    }

  if (tape != nullptr && needs_grad({&input})) {
    out.set_requires_grad(true);
    Tensor in_t = input, out_t = out;
    tape->record({input}, out, [in_t, out_t, argmax = std::move(argmax)]() mutable {
      const float* g = out_t.grad().data();
      float* gi = in_t.mutable_grad().data();
      for (std::size_t i = 0; i < argmax.size(); ++i)
        if (argmax[i] >= 0) gi[argmax[i]] += g[i];
    });
  }
  return out;
}

Tensor upsample_bilinear(const Tensor& input, int out_h, int out_w, Tape* tape) {
  const Shape& is = input.shape();
  if (out_h < is.h || out_w < is.w)
    throw ShapeError("upsample_bilinear: target " + std::to_string(out_h) + "x" +
                     std::to_string(out_w) + " smaller than source " + std::to_string(is.h) +
                     "x" + std::to_string(is.w));

  // Align-corners sampling grid, shared by forward and backward.
  const double sy = out_h > 1 ? static_cast<double>(is.h - 1) / (out_h - 1) : 0.0;
  const double sx = out_w > 1 ? static_cast<double>(is.w - 1) / (out_w - 1) : 0.0;
  std::vector<int> y0(out_h), x0(out_w);
  std::vector<float> wy(out_h), wx(out_w);
  for (int y = 0; y < out_h; ++y) {
    double fy = y * sy;
    int i = std::min(static_cast<int>(fy), is.h - 1);
    y0[y] = i;
    wy[y] = static_cast<float>(fy - i);
  }
  for (int x = 0; x < out_w; ++x) {
    double fx = x * sx;
    int i = std::min(static_cast<int>(fx), is.w - 1);
    x0[x] = i;
    wx[x] = static_cast<float>(fx - i);
  }

  Tensor out = Tensor::zeros({is.n, is.c, out_h, out_w});
  const float* in = input.values().data();
  float* o = out.mutable_values().data();
  const std::size_t planes = static_cast<std::size_t>(is.n) * is.c;
  for (std::size_t p = 0; p < planes; ++p) {
    const float* ip = in + p * is.h * is.w;
    float* op = o + p * static_cast<std::size_t>(out_h) * out_w;
    for (int y = 0; y < out_h; ++y) {
      const int ya = y0[y];
      const int yb = std::min(ya + 1, is.h - 1);
      const float fy = wy[y];
      const float* rowa = ip + static_cast<std::size_t>(ya) * is.w;
      const float* rowb = ip + static_cast<std::size_t>(yb) * is.w;
      float* orow = op + static_cast<std::size_t>(y) * out_w;
      for (int x = 0; x < out_w; ++x) {
        const int xa = x0[x];
        const int xb = std::min(xa + 1, is.w - 1);
        const float fx = wx[x];
        const float top = rowa[xa] + fx * (rowa[xb] - rowa[xa]);
        const float bot = rowb[xa] + fx * (rowb[xb] - rowb[xa]);
        orow[x] = top + fy * (bot - top);
      }
    }
  }

  if (tape != nullptr && needs_grad({&input})) {
    out.set_requires_grad(true);
    Tensor in_t = input, out_t = out;
    tape->record({input}, out, [in_t, out_t, y0, x0, wy, wx]() mutable {
      const Shape& is = in_t.shape();
      const Shape& os = out_t.shape();
      const float* g = out_t.grad().data();
      float* gi = in_t.mutable_grad().data();
      const std::size_t planes = static_cast<std::size_t>(is.n) * is.c;
      for (std::size_t p = 0; p < planes; ++p) {
        const float* gp = g + p * static_cast<std::size_t>(os.h) * os.w;
        float* gip = gi + p * is.h * is.w;
        for (int y = 0; y < os.h; ++y) {
          const int ya = y0[y];
          const int yb = std::min(ya + 1, is.h - 1);
          const float fy = wy[y];
          for (int x = 0; x < os.w; ++x) {
            const int xa = x0[x];
            const int xb = std::min(xa + 1, is.w - 1);
            const float fx = wx[x];
            const float gv = gp[static_cast<std::size_t>(y) * os.w + x];
            gip[static_cast<std::size_t>(ya) * is.w + xa] += (1 - fy) * (1 - fx) * gv;
            gip[static_cast<std::size_t>(ya) * is.w + xb] += (1 - fy) * fx * gv;
            gip[static_cast<std::size_t>(yb) * is.w + xa] += fy * (1 - fx) * gv;
            gip[static_cast<std::size_t>(yb) * is.w + xb] += fy * fx * gv;
          }
        }
      }
    });
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b, Tape* tape) {
  if (!(a.shape() == b.shape()))
    throw ShapeError("add: shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  Tensor out = Tensor::zeros(a.shape());
  const float* pa = a.values().data();
  const float* pb = b.values().data();
  float* o = out.mutable_values().data();
  const std::int64_t n = a.numel();
  for (std::int64_t i = 0; i < n; ++i) o[i] = pa[i] + pb[i];

  if (tape != nullptr && needs_grad({&a, &b})) {
    out.set_requires_grad(true);
    Tensor a_t = a, b_t = b, out_t = out;
    tape->record({a, b}, out, [a_t, b_t, out_t]() mutable {
      const float* g = out_t.grad().data();
      const std::int64_t n = out_t.numel();
      if (a_t.requires_grad()) {
        float* ga = a_t.mutable_grad().data();
        for (std::int64_t i = 0; i < n; ++i) ga[i] += g[i];
      }
      if (b_t.requires_grad()) {
        float* gb = b_t.mutable_grad().data();
        for (std::int64_t i = 0; i < n; ++i) gb[i] += g[i];
      }
    });
  }
  return out;
}

Tensor relu(const Tensor& input, Tape* tape) {
  Tensor out = Tensor::zeros(input.shape());
  const float* in = input.values().data();
  float* o = out.mutable_values().data();
  const std::int64_t n = input.numel();
  for (std::int64_t i = 0; i < n; ++i) o[i] = in[i] > 0.0f ? in[i] : 0.0f;

  if (tape != nullptr && needs_grad({&input})) {
    out.set_requires_grad(true);
    Tensor in_t = input, out_t = out;
    tape->record({input}, out, [in_t, out_t]() mutable {
      const float* g = out_t.grad().data();
      const float* in = in_t.values().data();
      float* gi = in_t.mutable_grad().data();
      const std::int64_t n = in_t.numel();
      for (std::int64_t i = 0; i < n; ++i)
        if (in[i] > 0.0f) gi[i] += g[i];
    });
  }
  return out;
}

Tensor sigmoid(const Tensor& input, Tape* tape) {
  // Smallest representable distance from the open interval's endpoints.
  constexpr float kLo = 6e-8f;
  constexpr float kHi = 1.0f - 6e-8f;
  Tensor out = Tensor::zeros(input.shape());
  const float* in = input.values().data();
  float* o = out.mutable_values().data();
  const std::int64_t n = input.numel();
  for (std::int64_t i = 0; i < n; ++i) {
    const float x = in[i];
    float y;
    if (x >= 0.0f) {
      y = 1.0f / (1.0f + std::exp(-x));
    } else {
      const float e = std::exp(x);
      y = e / (1.0f + e);
    }
    o[i] = std::min(std::max(y, kLo), kHi);
  }

  if (tape != nullptr && needs_grad({&input})) {
    out.set_requires_grad(true);
    Tensor in_t = input, out_t = out;
    tape->record({input}, out, [in_t, out_t]() mutable {
      const float* g = out_t.grad().data();
      const float* y = out_t.values().data();
      float* gi = in_t.mutable_grad().data();
      const std::int64_t n = in_t.numel();
      for (std::int64_t i = 0; i < n; ++i) gi[i] += g[i] * y[i] * (1.0f - y[i]);
    });
  }
  return out;
}

Tensor channel_affine(const Tensor& input, const Tensor& scale, const Tensor& shift, Tape* tape) {
  const Shape& is = input.shape();
  const Shape want{1, is.c, 1, 1};
  if (!(scale.shape() == want) || !(shift.shape() == want))
    throw ShapeError("channel_affine: scale/shift must be " + want.str());

  Tensor out = Tensor::zeros(is);
  const float* in = input.values().data();
  const float* s = scale.values().data();
  const float* b = shift.values().data();
  float* o = out.mutable_values().data();
  const std::size_t hw = static_cast<std::size_t>(is.h) * is.w;
  for (int n = 0; n < is.n; ++n)
    for (int c = 0; c < is.c; ++c) {
      const float sc = s[c], sh = b[c];
      const float* ip = in + (static_cast<std::size_t>(n) * is.c + c) * hw;
      float* op = o + (static_cast<std::size_t>(n) * is.c + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) op[i] = ip[i] * sc + sh;
    }

  if (tape != nullptr && needs_grad({&input, &scale, &shift})) {
    out.set_requires_grad(true);
    Tensor in_t = input, s_t = scale, b_t = shift, out_t = out;
    tape->record({input, scale, shift}, out, [in_t, s_t, b_t, out_t]() mutable {
      const Shape& is = in_t.shape();
      const float* g = out_t.grad().data();
      const float* in = in_t.values().data();
      const float* s = s_t.values().data();
      const std::size_t hw = static_cast<std::size_t>(is.h) * is.w;
      float* gi = in_t.requires_grad() ? in_t.mutable_grad().data() : nullptr;
      float* gs = s_t.requires_grad() ? s_t.mutable_grad().data() : nullptr;
      float* gb = b_t.requires_grad() ? b_t.mutable_grad().data() : nullptr;
      for (int n = 0; n < is.n; ++n)
        for (int c = 0; c < is.c; ++c) {
          const std::size_t off = (static_cast<std::size_t>(n) * is.c + c) * hw;
          float acc_s = 0.0f, acc_b = 0.0f;
          for (std::size_t i = 0; i < hw; ++i) {
            const float gv = g[off + i];
            if (gi != nullptr) gi[off + i] += gv * s[c];
            acc_s += gv * in[off + i];
            acc_b += gv;
          }
          if (gs != nullptr) gs[c] += acc_s;
          if (gb != nullptr) gb[c] += acc_b;
        }
    });
  }
  return out;
}

Tensor sum_all(const Tensor& input, Tape* tape) {
  double acc = 0.0;
  for (float v : input.values()) acc += v;
  Tensor out = Tensor::from_data({1, 1, 1, 1}, {static_cast<float>(acc)});

  if (tape != nullptr && needs_grad({&input})) {
    out.set_requires_grad(true);
    Tensor in_t = input, out_t = out;
    tape->record({input}, out, [in_t, out_t]() mutable {
      const float g = out_t.grad()[0];
      float* gi = in_t.mutable_grad().data();
      const std::int64_t n = in_t.numel();
      for (std::int64_t i = 0; i < n; ++i) gi[i] += g;
    });
  }
  return out;
}

}  // namespace rcnkit
