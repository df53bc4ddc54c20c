#include "rcnkit/nms.hpp"

#include <cmath>
#include <vector>

namespace rcnkit::bench {
namespace {

// Separable Gaussian with sigma 1, radius 3, replicated borders.
void gauss_smooth(const std::vector<float>& src, std::vector<float>& dst, int h, int w) {
  static const float kKernel[7] = {0.00443305f, 0.05400558f, 0.24203623f, 0.39905028f,
                                   0.24203623f, 0.05400558f, 0.00443305f};
  std::vector<float> tmp(src.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float acc = 0.0f;
      for (int k = -3; k <= 3; ++k) {
        const int xx = std::min(std::max(x + k, 0), w - 1);
        acc += kKernel[k + 3] * src[static_cast<std::size_t>(y) * w + xx];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float acc = 0.0f;
      for (int k = -3; k <= 3; ++k) {
        const int yy = std::min(std::max(y + k, 0), h - 1);
        acc += kKernel[k + 3] * tmp[static_cast<std::size_t>(yy) * w + x];
      }
      dst[static_cast<std::size_t>(y) * w + x] = acc;
    }
}

// Bilinear sample with zeros outside the image.
float sample(const std::vector<float>& v, int h, int w, double sy, double sx) {
  if (sy <= -1.0 || sy >= h || sx <= -1.0 || sx >= w) return 0.0f;
  const int y0 = static_cast<int>(std::floor(sy));
  const int x0 = static_cast<int>(std::floor(sx));
  const double fy = sy - y0, fx = sx - x0;
  auto at = [&](int y, int x) -> double {
    if (y < 0 || y >= h || x < 0 || x >= w) return 0.0;
    return v[static_cast<std::size_t>(y) * w + x];
  };
  const double top = at(y0, x0) * (1.0 - fx) + at(y0, x0 + 1) * fx;
  const double bot = at(y0 + 1, x0) * (1.0 - fx) + at(y0 + 1, x0 + 1) * fx;
  return static_cast<float>(top * (1.0 - fy) + bot * fy);
}

// Snap near-axis direction components so axis-aligned edges produce
// exact integer sample positions (their ties are then decidable).
double snap(double v) {
  if (std::abs(v) < 1e-6) return 0.0;
  if (std::abs(v - 1.0) < 1e-6) return 1.0;
  if (std::abs(v + 1.0) < 1e-6) return -1.0;
  return v;
}

// One suppression sweep; returns true when anything changed.
bool sweep(std::vector<float>& v, int h, int w) {
  const std::size_t n = v.size();
  std::vector<float> smooth(n), gx(n), gy(n);
  gauss_smooth(v, smooth, h, w);
  auto s_at = [&](int y, int x) {
    return smooth[static_cast<std::size_t>(std::min(std::max(y, 0), h - 1)) * w +
                  std::min(std::max(x, 0), w - 1)];
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      gx[static_cast<std::size_t>(y) * w + x] = 0.5f * (s_at(y, x + 1) - s_at(y, x - 1));
      gy[static_cast<std::size_t>(y) * w + x] = 0.5f * (s_at(y + 1, x) - s_at(y - 1, x));
    }
  std::vector<float> jxx(n), jxy(n), jyy(n);
  for (std::size_t i = 0; i < n; ++i) {
    jxx[i] = gx[i] * gx[i];
    jxy[i] = gx[i] * gy[i];
    jyy[i] = gy[i] * gy[i];
  }
  std::vector<float> sxx(n), sxy(n), syy(n);
  gauss_smooth(jxx, sxx, h, w);
  gauss_smooth(jxy, sxy, h, w);
  gauss_smooth(jyy, syy, h, w);

  bool changed = false;
  std::vector<float> out(v);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const float val = v[i];
      if (val <= 0.0f) continue;
      // Dominant eigenvector of the smoothed structure tensor: the
      // direction of greatest change, i.e. the edge normal.
      const double theta = 0.5 * std::atan2(2.0 * sxy[i], static_cast<double>(sxx[i]) -
                                                              syy[i]);
      double dx = snap(std::cos(theta));
      double dy = snap(std::sin(theta));
      // Point the normal's dominant component toward positive axis
      // direction. The anchored sign makes the tie-break below stable
      // under tiny orientation noise (the noisy minor component never
      // decides which way the normal faces).
      if (std::abs(dx) >= std::abs(dy) ? dx < 0.0 : dy < 0.0) {
        dx = -dx;
        dy = -dy;
      }
      // Strict maximum toward the negative side, ties allowed toward
      // the positive side: of an exact-value plateau, exactly the
      // pixel at the plateau's low-coordinate edge survives (the left
      // column of a vertical double ridge, the top row of a
      // horizontal one).
      const float plus = sample(v, h, w, y + dy, x + dx);
      const float minus = sample(v, h, w, y - dy, x - dx);
      if (val < plus || val <= minus) {
        out[i] = 0.0f;
        changed = true;
      }
    }
  v.swap(out);
  return changed;
}

}  // namespace

ContourPrediction nms_thin(const ContourPrediction& pred) {
  ContourPrediction out = pred;
  if (out.h <= 0 || out.w <= 0) return out;
  // Each sweep only removes pixels, so the fixpoint exists; reaching it
  // makes a second nms_thin a no-op.
  while (sweep(out.values, out.h, out.w)) {
  }
  return out;
}

}  // namespace rcnkit::bench
