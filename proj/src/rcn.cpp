#include "rcnkit/rcn.hpp"

#include <cmath>

#include "rcnkit/errors.hpp"
#include "rcnkit/ops.hpp"
#include "rcnkit/rng.hpp"

namespace rcnkit::graph {
namespace {

void plan_conv(std::vector<std::pair<std::string, Shape>>& plan, const std::string& name,
               int oc, int ic, int k, bool bias) {
  plan.emplace_back(name + ".weight", Shape{oc, ic, k, k});
  if (bias) plan.emplace_back(name + ".bias", Shape{1, oc, 1, 1});
}

void plan_affine(std::vector<std::pair<std::string, Shape>>& plan, const std::string& name,
                 int c) {
  plan.emplace_back(name + ".scale", Shape{1, c, 1, 1});
  plan.emplace_back(name + ".shift", Shape{1, c, 1, 1});
}

void plan_rcu(std::vector<std::pair<std::string, Shape>>& plan, const std::string& name,
              int c) {
  plan_conv(plan, name + ".conv1", c, c, 3, true);
  plan_conv(plan, name + ".conv2", c, c, 3, true);
}

}  // namespace

std::vector<std::pair<std::string, Shape>> parameter_plan(const NetworkSpec& spec) {
  spec.validate();
  std::vector<std::pair<std::string, Shape>> plan;

  const int stem_c = spec.backbone.stages[0].channels;
  plan_conv(plan, "backbone.stem.conv", stem_c, 3, spec.backbone.stem_kernel, false);
  plan_affine(plan, "backbone.stem.aff", stem_c);

  int in_c = stem_c;
  for (int s = 0; s < 4; ++s) {
    const StageSpec& st = spec.backbone.stages[s];
    for (int b = 0; b < st.blocks; ++b) {
      const std::string base =
          "backbone.s" + std::to_string(s + 1) + ".b" + std::to_string(b);
      const int stride = b == 0 ? st.stride : 1;
      plan_conv(plan, base + ".conv1", st.channels, in_c, 3, false);
      plan_affine(plan, base + ".aff1", st.channels);
      plan_conv(plan, base + ".conv2", st.channels, st.channels, 3, false);
      plan_affine(plan, base + ".aff2", st.channels);
      if (stride != 1 || in_c != st.channels) {
        plan_conv(plan, base + ".proj", st.channels, in_c, 1, false);
        plan_affine(plan, base + ".proj_aff", st.channels);
      }
      in_c = st.channels;
    }
  }

  for (int i = 0; i < spec.path.deepest_rcus; ++i)
    plan_rcu(plan, "refine.d.rcu" + std::to_string(i), spec.backbone.stages[3].channels);

  int high_c = spec.backbone.stages[3].channels;
  for (int f = 0; f < 3; ++f) {
    const FusionSpec& fu = spec.path.fusions[f];
    const int low_c = spec.backbone.stages[2 - f].channels;
    const std::string base = "refine.f" + std::to_string(f + 1);
    for (int i = 0; i < fu.rcu_in; ++i)
      plan_rcu(plan, base + ".in_rcu" + std::to_string(i), low_c);
    plan_conv(plan, base + ".mrf.high", fu.fused_channels, high_c, 3, true);
    plan_conv(plan, base + ".mrf.low", fu.fused_channels, low_c, 3, true);
    for (int i = 0; i < fu.crp_blocks; ++i)
      plan_conv(plan, base + ".crp.c" + std::to_string(i), fu.fused_channels,
                fu.fused_channels, 3, true);
    for (int i = 0; i < fu.rcu_out; ++i)
      plan_rcu(plan, base + ".out_rcu" + std::to_string(i), fu.fused_channels);
    high_c = fu.fused_channels;
  }

  plan_conv(plan, "img.entry", spec.image_path_channels, 3, 3, true);
  for (int i = 0; i < spec.image_path_rcus; ++i)
    plan_rcu(plan, "img.rcu" + std::to_string(i), spec.image_path_channels);

  plan_conv(plan, "fuse.mrf.high", spec.image_path_channels, high_c, 3, true);
  plan_conv(plan, "fuse.mrf.low", spec.image_path_channels, spec.image_path_channels, 3, true);
  plan_conv(plan, "head.conv", 1, spec.image_path_channels, 3, true);
  return plan;
}

RcnModel::RcnModel(const NetworkSpec& spec, std::uint64_t seed) : spec_(spec) {
  Rng rng = Rng(seed).split(0x52434e);
  for (const auto& [name, shape] : parameter_plan(spec_)) {
    Tensor t = params_.create(name, shape);
    if (name.ends_with(".weight")) {
      const float fan_in = static_cast<float>(shape.c) * shape.h * shape.w;
      // The residual adds grow the activation variance as depth
      // accumulates, so the head starts an order of magnitude smaller;
      // otherwise the initial logits saturate the sigmoid and training
      // begins inside the clamped flat region.
      const float gain = name == "head.conv.weight" ? 0.1f : 1.0f;
      const float std_dev = gain * std::sqrt(2.0f / fan_in);
      for (auto& v : t.mutable_values()) v = rng.normalf(0.0f, std_dev);
    } else if (name.ends_with(".scale")) {
      for (auto& v : t.mutable_values()) v = 1.0f;
    }
    // biases and shifts stay zero
  }
}

RcnModel::RcnModel(const NetworkSpec& spec, ParameterStore params)
    : spec_(spec), params_(std::move(params)) {
  const auto plan = parameter_plan(spec_);
  if (plan.size() != params_.size())
    throw ConfigError("net: checkpoint has " + std::to_string(params_.size()) +
                      " parameters, spec expects " + std::to_string(plan.size()));
  for (const auto& [name, shape] : plan) {
    if (!params_.contains(name))
      throw ConfigError("net: checkpoint is missing parameter '" + name + "'");
    const Shape& got = params_.get(name).shape();
    if (!(got == shape))
      throw ConfigError("net: parameter '" + name + "' has shape " + got.str() +
                        ", spec expects " + shape.str());
  }
}

Tensor RcnModel::normalize(const Tensor& image01) const {
  const Shape& s = image01.shape();
  if (s.c != 3) throw ShapeError("normalize: expected 3 channels, got " + s.str());
  Tensor out = Tensor::zeros(s);
  auto in = image01.values();
  auto o = out.mutable_values();
  const std::size_t hw = static_cast<std::size_t>(s.h) * s.w;
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < 3; ++c) {
      const float mean = spec_.norm_mean[c], scale = spec_.norm_scale[c];
      const std::size_t off = (static_cast<std::size_t>(n) * 3 + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) o[off + i] = (in[off + i] - mean) / scale;
    }
  return out;
}

namespace {

// Forward helpers are free functions over the store so the model's
// const forward can share them.
Tensor conv_fwd(const ParameterStore& p, const Tensor& x, const std::string& name, int stride,
                int padding, Tape* tape) {
  const bool bias = p.contains(name + ".bias");
  return conv2d(x, p.get(name + ".weight"), bias ? p.get(name + ".bias") : Tensor(), stride,
                padding, tape);
}

Tensor affine_fwd(const ParameterStore& p, const Tensor& x, const std::string& name,
                  Tape* tape) {
  return channel_affine(x, p.get(name + ".scale"), p.get(name + ".shift"), tape);
}

Tensor block_fwd(const ParameterStore& p, const Tensor& x, const std::string& base, int stride,
                 Tape* tape) {
  Tensor y = conv_fwd(p, x, base + ".conv1", stride, 1, tape);
  y = relu(affine_fwd(p, y, base + ".aff1", tape), tape);
  y = conv_fwd(p, y, base + ".conv2", 1, 1, tape);
  y = affine_fwd(p, y, base + ".aff2", tape);
  Tensor shortcut = x;
  if (p.contains(base + ".proj.weight"))
    shortcut = affine_fwd(p, conv_fwd(p, x, base + ".proj", stride, 0, tape),
                          base + ".proj_aff", tape);
  return relu(add(y, shortcut, tape), tape);
}

Tensor rcu_fwd(const ParameterStore& p, const Tensor& x, const std::string& base, Tape* tape) {
  Tensor y = conv_fwd(p, relu(x, tape), base + ".conv1", 1, 1, tape);
  y = conv_fwd(p, relu(y, tape), base + ".conv2", 1, 1, tape);
  return add(x, y, tape);
}

Tensor mrf_fwd(const ParameterStore& p, const Tensor& high, const Tensor& low,
               const std::string& base, Tape* tape) {
  Tensor h = conv_fwd(p, high, base + ".high", 1, 1, tape);
  Tensor l = conv_fwd(p, low, base + ".low", 1, 1, tape);
  h = upsample_bilinear(h, low.shape().h, low.shape().w, tape);
  return add(h, l, tape);
}

Tensor crp_fwd(const ParameterStore& p, const Tensor& x, const std::string& base, int blocks,
               Tape* tape) {
  Tensor acc = x;
  Tensor run = x;
  for (int i = 0; i < blocks; ++i) {
    run = conv_fwd(p, max_pool(run, 5, 1, 2, tape), base + ".c" + std::to_string(i), 1, 1,
                   tape);
    acc = add(acc, run, tape);
  }
  return acc;
}

}  // namespace

Tensor RcnModel::forward(const Tensor& input, Tape* tape, ForwardTrace* trace,
                         bool check_finite) const {
  const Shape& is = input.shape();
  if (is.c != 3) throw ShapeError("forward: expected 3 input channels, got " + is.str());
  if (is.h < 32 || is.w < 32)
    throw ShapeError("forward: input must be at least 32x32, got " + is.str());

  auto checked = [&](Tensor t, const std::string& where) {
    if (check_finite && !t.all_finite())
      throw NumericError("non-finite activations after " + where);
    return t;
  };

  // Stem to 1/2 resolution, then four stages to 1/4 ... 1/32.
  Tensor cur = conv_fwd(params_, input, "backbone.stem.conv", spec_.backbone.stem_stride,
                        spec_.backbone.stem_kernel / 2, tape);
  cur = relu(affine_fwd(params_, cur, "backbone.stem.aff", tape), tape);
  if (spec_.backbone.stem_pool) cur = max_pool(cur, 3, 2, 1, tape);
  cur = checked(cur, "backbone.stem");

  std::vector<Tensor> features;
  for (int s = 0; s < 4; ++s) {
    const StageSpec& st = spec_.backbone.stages[s];
    for (int b = 0; b < st.blocks; ++b) {
      const std::string base =
          "backbone.s" + std::to_string(s + 1) + ".b" + std::to_string(b);
      cur = block_fwd(params_, cur, base, b == 0 ? st.stride : 1, tape);
    }
    cur = checked(cur, "backbone.s" + std::to_string(s + 1));
    features.push_back(cur);
  }
  if (trace != nullptr) trace->backbone = features;

  // Refinement path, deepest first.
  Tensor path = features[3];
  for (int i = 0; i < spec_.path.deepest_rcus; ++i)
    path = rcu_fwd(params_, path, "refine.d.rcu" + std::to_string(i), tape);
  path = checked(path, "refine.d");

  for (int f = 0; f < 3; ++f) {
    const FusionSpec& fu = spec_.path.fusions[f];
    const std::string base = "refine.f" + std::to_string(f + 1);
    Tensor low = features[2 - f];
    for (int i = 0; i < fu.rcu_in; ++i)
      low = rcu_fwd(params_, low, base + ".in_rcu" + std::to_string(i), tape);
    path = mrf_fwd(params_, path, low, base + ".mrf", tape);
    path = relu(path, tape);  // CRP expects relu-activated input
    path = crp_fwd(params_, path, base + ".crp", fu.crp_blocks, tape);
    for (int i = 0; i < fu.rcu_out; ++i)
      path = rcu_fwd(params_, path, base + ".out_rcu" + std::to_string(i), tape);
    path = checked(path, base);
    if (trace != nullptr) trace->fused.push_back(path);
  }

  // Original-image path with its own RCUs, fused last.
  const int entry_stride = spec_.output_scale == OutputScale::half ? 2 : 1;
  Tensor img = conv_fwd(params_, input, "img.entry", entry_stride, 1, tape);
  for (int i = 0; i < spec_.image_path_rcus; ++i)
    img = rcu_fwd(params_, img, "img.rcu" + std::to_string(i), tape);
  img = checked(img, "img");
  if (trace != nullptr) trace->image_path = img;

  Tensor out = mrf_fwd(params_, path, img, "fuse.mrf", tape);
  out = checked(out, "fuse.mrf");
  out = sigmoid(conv_fwd(params_, out, "head.conv", 1, 1, tape), tape);
  out = checked(out, "head");
  if (trace != nullptr) trace->output = out;
  return out;
}

Tensor RcnModel::forward_upsampled(const Tensor& input, Tape* tape) const {
  Tensor out = forward(input, tape);
  const Shape& is = input.shape();
  if (out.shape().h != is.h || out.shape().w != is.w)
    out = upsample_bilinear(out, is.h, is.w, tape);
  return out;
}

ContourPrediction RcnModel::predict(const ImageU8& image) const {
  Tensor x = normalize(image_to_tensor(image));
  Tensor out = forward(x, nullptr, nullptr, /*check_finite=*/true);
  if (out.shape().h != image.h || out.shape().w != image.w)
    out = upsample_bilinear(out, image.h, image.w, nullptr);
  return tensor_to_prediction(out);
}

}  // namespace rcnkit::graph
