#pragma once

#include "rcnkit/tensor.hpp"

namespace rcnkit {

// Forward operators of the network graph. Each op validates shapes, computes
// the float32 result, and (when a tape is supplied and gradient is needed)
// records its backward rule. Pass tape = nullptr for inference.

// input (N,Ci,H,W) * weight (Co,Ci,kh,kw) -> (N,Co,OH,OW). bias may be an
// undefined Tensor; otherwise shape (1,Co,1,1).
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
              int padding, Tape* tape);

// Padded cells count as -inf and are never selected; backward routes the
// gradient to the first maximal cell in row-major window order.
Tensor max_pool(const Tensor& input, int kernel, int stride, int padding, Tape* tape);

// Align-corners bilinear interpolation; target extents must be >= source.
Tensor upsample_bilinear(const Tensor& input, int out_h, int out_w, Tape* tape);

Tensor add(const Tensor& a, const Tensor& b, Tape* tape);
Tensor relu(const Tensor& input, Tape* tape);
// Output clamped into (0,1): never exactly 0 or 1 even where float32
// saturates.
Tensor sigmoid(const Tensor& input, Tape* tape);

// Per-channel y = x*scale[c] + shift[c]; scale and shift are (1,C,1,1).
Tensor channel_affine(const Tensor& input, const Tensor& scale, const Tensor& shift, Tape* tape);

// Scalar (1,1,1,1) sum of all elements.
Tensor sum_all(const Tensor& input, Tape* tape);

}  // namespace rcnkit
