#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rcnkit/tensor.hpp"

namespace rcnkit {

// Where a label map came from; carried for bookkeeping only.
enum class LabelSource { mask_derived, enriched, annotator, synthetic };

// Binary ground-truth contour map, one byte per pixel in {0,1}.
struct LabelMap {
  int h = 0, w = 0;
  std::vector<std::uint8_t> pixels;
  LabelSource source = LabelSource::synthetic;
  int annotator_id = -1;

  static LabelMap zeros(int h, int w) {
    return LabelMap{h, w, std::vector<std::uint8_t>(static_cast<std::size_t>(h) * w, 0)};
  }
  std::uint8_t at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * w + x]; }
  void set(int y, int x, std::uint8_t v) { pixels[static_cast<std::size_t>(y) * w + x] = v; }
  std::int64_t positive_count() const {
    std::int64_t n = 0;
    for (auto p : pixels) n += p != 0;
    return n;
  }
};

// Per-pixel contour probability map, values in [0,1].
struct ContourPrediction {
  int h = 0, w = 0;
  std::vector<float> values;

  static ContourPrediction zeros(int h, int w) {
    return ContourPrediction{h, w, std::vector<float>(static_cast<std::size_t>(h) * w, 0.0f)};
  }
  float at(int y, int x) const { return values[static_cast<std::size_t>(y) * w + x]; }
  void set(int y, int x, float v) { values[static_cast<std::size_t>(y) * w + x] = v; }
};

// All annotator boundary maps for one image.
struct GroundTruthSet {
  std::vector<LabelMap> annotators;
};

// 8-bit interleaved raster, channels = 1 (gray) or 3 (RGB).
struct ImageU8 {
  int h = 0, w = 0, channels = 1;
  std::vector<std::uint8_t> pixels;

  static ImageU8 filled(int h, int w, int channels, std::uint8_t v) {
    return ImageU8{h, w, channels,
                   std::vector<std::uint8_t>(static_cast<std::size_t>(h) * w * channels, v)};
  }
  std::uint8_t at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * w + x) * channels + c];
  }
  void set(int y, int x, std::uint8_t v) {
    for (int c = 0; c < channels; ++c)
      pixels[(static_cast<std::size_t>(y) * w + x) * channels + c] = v;
  }
};

// Conversions between raster types and network tensors.
Tensor image_to_tensor(const ImageU8& image);           // 1x3xHxW in [0,1]
Tensor label_to_tensor(const LabelMap& label);          // 1x1xHxW in {0,1}
ContourPrediction tensor_to_prediction(const Tensor&);  // 1x1xHxW clamped to [0,1]
LabelMap binarize(const ContourPrediction& pred, float threshold);  // value >= threshold

}  // namespace rcnkit
