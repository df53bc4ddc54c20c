#pragma once

#include "rcnkit/maps.hpp"
#include "rcnkit/rng.hpp"
#include "rcnkit/tensor.hpp"

namespace rcnkit::train {

struct AugmentConfig {
  int crop_h = 64, crop_w = 64;
  float vflip_prob = 0.5f;              // the flip axis the paper names
  bool horizontal_flip = false;         // conventional alternative, off by default
  float scale_lo = 0.7f, scale_hi = 1.3f;
};

// One training example: image in [0,1] plus its binary label.
struct Sample {
  Tensor image;  // 1x3xHxW
  LabelMap label;
  int annotator_id = -1;
};

// Random scale (bilinear image / nearest label), optional flip, uniform
// crop. Draw order is fixed (scale, flip, crop_y, crop_x) so trajectories
// are reproducible. If the scaled extent falls below the crop it is
// rescaled up to fit; labels stay binary throughout.
Sample augment(const Sample& sample, const AugmentConfig& cfg, Rng& rng);

// Plain float resamplers shared with the augmentation pipeline.
Tensor resize_bilinear(const Tensor& image, int out_h, int out_w);
LabelMap resize_nearest(const LabelMap& label, int out_h, int out_w);

}  // namespace rcnkit::train
