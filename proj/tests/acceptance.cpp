// Acceptance gate: nine numbered criteria, one PASS/FAIL line each, with
// the pinned tolerance and the measured value printed on every line. The
// process exit code is the number of failed criteria, so a zero exit
// means the whole gate holds. Everything is seeded and single-threaded;
// reruns print bit-identical numbers.
//
// Numeric conventions used by the gradient checks (criterion 1):
//   * Operator-level checks compare per-element central differences
//     against analytic gradients at 1e-3 relative with a 0.05 denominator
//     floor. Step sizes are chosen per operator so that piecewise-linear
//     operators are differenced exactly (no truncation term) and curved
//     operators keep the truncation term two orders below the tolerance.
//   * The end-to-end check differences the training loss along the
//     normalized analytic gradient direction of each sampled parameter
//     tensor (directional derivative equals the gradient norm), taking
//     the best of four step sizes. Float32 forward noise puts a ~2e-3
//     absolute floor on what a finite difference can resolve near ReLU
//     kinks, so a tensor passes at 1e-2 relative or 2e-3 absolute.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rcnkit/augment.hpp"
#include "rcnkit/benchmark.hpp"
#include "rcnkit/checkpoint.hpp"
#include "rcnkit/config.hpp"
#include "rcnkit/errors.hpp"
#include "rcnkit/forge.hpp"
#include "rcnkit/image_io.hpp"
#include "rcnkit/loss.hpp"
#include "rcnkit/maps.hpp"
#include "rcnkit/matching.hpp"
#include "rcnkit/net_spec.hpp"
#include "rcnkit/nms.hpp"
#include "rcnkit/ops.hpp"
#include "rcnkit/pipeline.hpp"
#include "rcnkit/rcn.hpp"
#include "rcnkit/rng.hpp"
#include "rcnkit/tensor.hpp"
#include "rcnkit/trainer.hpp"

namespace fs = std::filesystem;
using namespace rcnkit;

namespace {

// ---------------------------------------------------------------------
// Shared utilities
// ---------------------------------------------------------------------

struct TempDir {
  fs::path path;
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "rcnkit_accept_XXXXXX").string();
    path = mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Tensor random_tensor(const Shape& shape, Rng& rng, float lo, float hi) {
  std::vector<float> v(static_cast<std::size_t>(shape.numel()));
  for (float& x : v) x = static_cast<float>(rng.uniform(lo, hi));
  return Tensor::from_data(shape, std::move(v));
}

LabelMap points_to_label(int h, int w, const std::vector<std::pair<int, int>>& yx) {
  LabelMap m = LabelMap::zeros(h, w);
  for (const auto& [y, x] : yx) m.set(y, x, 1);
  return m;
}

std::vector<std::pair<int, int>> positives(const LabelMap& m) {
  std::vector<std::pair<int, int>> out;
  for (int y = 0; y < m.h; ++y)
    for (int x = 0; x < m.w; ++x)
      if (m.at(y, x)) out.emplace_back(y, x);
  return out;
}

// ---------------------------------------------------------------------
// Criterion 1: gradient correctness
// ---------------------------------------------------------------------

// Weighted scalar readout of an operator output: the analytic side runs
// the weights through a full-extent convolution recorded on the tape
// (dZ/dY is exactly the weight tensor), the finite-difference side sums
// W*Y in double so the only noise left is the operator's own float32
// output quantization.
struct OpProbe {
  std::string name;
  std::vector<Tensor> inputs;                                    // leaves to check
  std::function<Tensor(const std::vector<Tensor>&, Tape*)> fwd;  // op under test
  // Per-element FD step; defaults to the exact-difference rule for
  // piecewise-linear operators.
  std::function<double(float)> eps = [](float x) {
    return 0.1 * std::max(1.0f, std::abs(x));
  };
  std::vector<std::size_t> skip;  // input indices without FD (e.g. labels)
};

Tensor readout_weights(const Shape& shape, Rng& rng) {
  std::vector<float> v(static_cast<std::size_t>(shape.numel()));
  for (float& x : v) {
    const float mag = static_cast<float>(rng.uniform(0.3, 1.2));
    x = rng.bernoulli(0.5) ? mag : -mag;
  }
  return Tensor::from_data(shape, std::move(v));
}

// Worst relative error over every element of every checked input.
double check_operator(const OpProbe& probe, Rng& rng) {
  for (std::size_t j = 0; j < probe.inputs.size(); ++j) {
    if (std::find(probe.skip.begin(), probe.skip.end(), j) != probe.skip.end()) continue;
    Tensor leaf = probe.inputs[j];
    leaf.set_requires_grad(true);
  }
  // Analytic pass.
  Tape tape;
  Tensor out = probe.fwd(probe.inputs, &tape);
  const Shape os = out.shape();
  Tensor w = readout_weights(Shape{1, os.c, os.h, os.w}, rng);
  Tensor undefined_bias;
  Tensor z = conv2d(out, w, undefined_bias, 1, 0, &tape);
  if (z.shape().numel() != 1)
    throw NumericError("operator probe readout is not scalar for " + probe.name);
  for (const Tensor& t : probe.inputs) {
    Tensor leaf = t;
    leaf.zero_grad();
  }
  tape.backward(z);

  // Double-precision readout of one forward evaluation.
  const auto readout = [&](const std::vector<Tensor>& inputs) {
    Tensor y = probe.fwd(inputs, nullptr);
    const auto& yv = y.values();
    const auto& wv = w.values();
    double sum = 0.0;
    for (std::size_t i = 0; i < yv.size(); ++i)
      sum += static_cast<double>(wv[i]) * static_cast<double>(yv[i]);
    return sum;
  };

  double worst = 0.0;
  for (std::size_t j = 0; j < probe.inputs.size(); ++j) {
    if (std::find(probe.skip.begin(), probe.skip.end(), j) != probe.skip.end()) continue;
    const Tensor& leaf = probe.inputs[j];
    const auto& grad = leaf.grad();
    for (std::size_t i = 0; i < leaf.values().size(); ++i) {
      const float x0 = leaf.values()[i];
      const double eps = probe.eps(x0);
      std::vector<Tensor> shifted;
      shifted.reserve(probe.inputs.size());
      for (const Tensor& t : probe.inputs) shifted.push_back(t.clone());
      shifted[j].mutable_values()[i] = static_cast<float>(x0 + eps);
      const double up = readout(shifted);
      shifted[j].mutable_values()[i] = static_cast<float>(x0 - eps);
      const double down = readout(shifted);
      const double fd = (up - down) / (2.0 * eps);
      const double g = grad[i];
      const double rel = std::abs(fd - g) / std::max({std::abs(fd), std::abs(g), 0.05});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

// A lattice whose window-local values stay >= 0.3 apart, so pooling
// argmaxes survive the FD step.
Tensor pool_lattice(const Shape& shape, Rng& rng) {
  const std::size_t n = static_cast<std::size_t>(shape.numel());
  std::vector<int> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_int(static_cast<int>(i))]);
  std::vector<float> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 0.5f + 0.3f * static_cast<float>(perm[i]);
  return Tensor::from_data(shape, std::move(v));
}

// ReLU inputs keep |x| >= 0.15 so no FD step crosses the kink.
Tensor relu_safe(const Shape& shape, Rng& rng) {
  std::vector<float> v(static_cast<std::size_t>(shape.numel()));
  for (float& x : v) {
    const float mag = 0.15f + 0.85f * static_cast<float>(rng.uniform01());
    x = rng.bernoulli(0.5) ? mag : -mag;
  }
  return Tensor::from_data(shape, std::move(v));
}

bool criterion1(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(501);

  // --- operator-level checks, 1e-3 relative ---------------------------
  std::vector<OpProbe> probes;
  std::uint64_t stream = 0;
  const auto uni = [&](const Shape& s, float lo, float hi) {
    Rng local = rng.split(stream++);
    return random_tensor(s, local, lo, hi);
  };

  // conv2d: stride 1 padded, stride 2, 1x1, and a 5x5 without bias.
  probes.push_back({"conv2d k3 s1 p1",
                    {uni({1, 3, 8, 8}, -1, 1), uni({4, 3, 3, 3}, -0.7f, 0.7f),
                     uni({1, 4, 1, 1}, -0.5f, 0.5f)},
                    [](const std::vector<Tensor>& in, Tape* t) {
                      return conv2d(in[0], in[1], in[2], 1, 1, t);
                    }});
  probes.push_back({"conv2d k3 s2 p1",
                    {uni({1, 3, 9, 9}, -1, 1), uni({2, 3, 3, 3}, -0.7f, 0.7f),
                     uni({1, 2, 1, 1}, -0.5f, 0.5f)},
                    [](const std::vector<Tensor>& in, Tape* t) {
                      return conv2d(in[0], in[1], in[2], 2, 1, t);
                    }});
  probes.push_back({"conv2d k1 s1 p0",
                    {uni({1, 4, 6, 6}, -1, 1), uni({3, 4, 1, 1}, -0.9f, 0.9f),
                     uni({1, 3, 1, 1}, -0.5f, 0.5f)},
                    [](const std::vector<Tensor>& in, Tape* t) {
                      return conv2d(in[0], in[1], in[2], 1, 0, t);
                    }});
  probes.push_back({"conv2d k5 s1 p2 nobias",
                    {uni({1, 2, 10, 10}, -1, 1), uni({2, 2, 5, 5}, -0.4f, 0.4f)},
                    [](const std::vector<Tensor>& in, Tape* t) {
                      Tensor none;
                      return conv2d(in[0], in[1], none, 1, 2, t);
                    }});

  // max_pool: FD steps capped at 0.05, half the 0.3 lattice spacing.
  {
    Rng r1 = rng.split(stream++), r2 = rng.split(stream++);
    OpProbe p1{"max_pool k2 s2",
               {pool_lattice({1, 2, 6, 6}, r1)},
               [](const std::vector<Tensor>& in, Tape* t) { return max_pool(in[0], 2, 2, 0, t); }};
    p1.eps = [](float) { return 0.05; };
    probes.push_back(std::move(p1));
    OpProbe p2{"max_pool k3 s2 p1",
               {pool_lattice({1, 1, 7, 7}, r2)},
               [](const std::vector<Tensor>& in, Tape* t) { return max_pool(in[0], 3, 2, 1, t); }};
    p2.eps = [](float) { return 0.05; };
    probes.push_back(std::move(p2));
  }

  probes.push_back({"upsample 5x7->8x11",
                    {uni({1, 2, 5, 7}, -1, 1)},
                    [](const std::vector<Tensor>& in, Tape* t) {
                      return upsample_bilinear(in[0], 8, 11, t);
                    }});
  probes.push_back({"upsample 4x4->8x8",
                    {uni({1, 1, 4, 4}, -1, 1)},
                    [](const std::vector<Tensor>& in, Tape* t) {
                      return upsample_bilinear(in[0], 8, 8, t);
                    }});
  probes.push_back({"add",
                    {uni({1, 2, 5, 5}, -1, 1), uni({1, 2, 5, 5}, -1, 1)},
                    [](const std::vector<Tensor>& in, Tape* t) { return add(in[0], in[1], t); }});
  {
    Rng r = rng.split(stream++);
    probes.push_back({"relu",
                      {relu_safe({1, 2, 6, 6}, r)},
                      [](const std::vector<Tensor>& in, Tape* t) { return relu(in[0], t); }});
    probes.back().eps = [](float x) { return 0.5 * std::abs(x); };
  }
  {
    OpProbe p{"sigmoid",
              {uni({1, 2, 5, 5}, -2, 2)},
              [](const std::vector<Tensor>& in, Tape* t) { return sigmoid(in[0], t); }};
    p.eps = [](float x) { return 0.01 * std::max(0.5f, std::abs(x)); };
    probes.push_back(std::move(p));
  }
  probes.push_back({"channel_affine",
                    {uni({1, 3, 5, 5}, -1, 1), uni({1, 3, 1, 1}, 0.5f, 1.5f),
                     uni({1, 3, 1, 1}, -0.5f, 0.5f)},
                    [](const std::vector<Tensor>& in, Tape* t) {
                      return channel_affine(in[0], in[1], in[2], t);
                    }});
  probes.push_back({"sum_all",
                    {uni({1, 2, 4, 5}, -1, 1)},
                    [](const std::vector<Tensor>& in, Tape* t) { return sum_all(in[0], t); }});
  // The training loss, mixed labels; the label tensor gets no FD.
  {
    Tensor labels = Tensor::from_data({1, 1, 2, 2}, {1.0f, 0.0f, 0.0f, 1.0f});
    OpProbe p{"weighted_logistic_loss",
              {uni({1, 1, 2, 2}, 0.1f, 0.9f), labels},
              [](const std::vector<Tensor>& in, Tape* t) {
                return train::weighted_logistic_loss(in[0], in[1], train::LossConfig{}, t);
              }};
    p.eps = [](float x) { return 0.02 * std::max(0.05f, std::abs(x)); };
    p.skip = {1};
    probes.push_back(std::move(p));
  }

  double op_worst = 0.0;
  std::string op_worst_name = "-";
  for (const OpProbe& p : probes) {
    Rng r = rng.split(1000 + stream++);
    const double rel = check_operator(p, r);
    if (rel > op_worst) {
      op_worst = rel;
      op_worst_name = p.name;
    }
  }
  const bool ops_ok = op_worst <= 1e-3;

  // --- end-to-end: 50 sampled parameter tensors of the desk RCN -------
  graph::NetworkSpec spec = graph::NetworkSpec::desk_default();
  graph::RcnModel model(spec, 7);
  Rng img_rng(123);
  Tensor image = random_tensor({1, 3, 32, 32}, img_rng, 0.0f, 1.0f);
  LabelMap ring = LabelMap::zeros(32, 32);
  for (int x = 8; x <= 23; ++x) {
    ring.set(8, x, 1);
    ring.set(20, x, 1);
  }
  for (int y = 8; y <= 19; ++y) {
    ring.set(y, 8, 1);
    ring.set(y, 23, 1);
  }
  Tensor label = Tensor::zeros({1, 1, 32, 32});
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      label.mutable_values()[static_cast<std::size_t>(y) * 32 + x] =
          ring.at(y, x) ? 1.0f : 0.0f;

  const auto loss_double = [&]() {
    Tape tape;
    Tensor pred = model.forward_upsampled(model.normalize(image), &tape);
    const auto& pv = pred.values();
    const auto& lv = label.values();
    double sum = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
      const double p = std::clamp(static_cast<double>(pv[i]), 1e-7, 1.0 - 1e-7);
      sum += lv[i] > 0.5f ? -10.0 * std::log(p) : -std::log(1.0 - p);
    }
    return sum / static_cast<double>(pv.size());
  };

  // Analytic gradients for every parameter in one backward pass.
  model.params().zero_grads();
  {
    Tape tape;
    Tensor pred = model.forward_upsampled(model.normalize(image), &tape);
    Tensor loss = train::weighted_logistic_loss(pred, label, train::LossConfig{}, &tape);
    tape.backward(loss);
  }

  std::vector<std::string> names = model.params().names();
  const std::size_t total = names.size();
  // Seeded Fisher-Yates; the first 50 names form the sample.
  Rng pick(2024);
  for (std::size_t i = names.size(); i > 1; --i)
    std::swap(names[i - 1], names[pick.uniform_int(static_cast<int>(i))]);
  const std::size_t sample = std::min<std::size_t>(50, names.size());

  const double ladder[] = {3e-3, 1e-3, 3e-4, 1e-4};
  double e2e_worst_rel = 0.0, e2e_worst_abs = 0.0;
  std::string e2e_worst_name = "-";
  int atol_used = 0;
  bool e2e_ok = true;
  for (std::size_t k = 0; k < sample; ++k) {
    Tensor param = model.params().get(names[k]);
    const std::vector<float> base(param.values().begin(), param.values().end());
    const auto grad = param.grad();
    double norm = 0.0;
    for (float g : grad) norm += static_cast<double>(g) * g;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      e2e_ok = false;
      e2e_worst_name = names[k] + " (zero grad)";
      continue;
    }
    double best_rel = 1e30, best_abs = 1e30;
    for (const double eps : ladder) {
      auto vals = param.mutable_values();
      for (std::size_t i = 0; i < vals.size(); ++i)
        vals[i] = static_cast<float>(base[i] + eps * grad[i] / norm);
      const double up = loss_double();
      for (std::size_t i = 0; i < vals.size(); ++i)
        vals[i] = static_cast<float>(base[i] - eps * grad[i] / norm);
      const double down = loss_double();
      for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = base[i];
      const double fd = (up - down) / (2.0 * eps);
      const double abs_err = std::abs(fd - norm);
      const double rel = abs_err / std::max(std::abs(fd), norm);
      best_rel = std::min(best_rel, rel);
      best_abs = std::min(best_abs, abs_err);
    }
    const bool tensor_ok = best_rel <= 1e-2 || best_abs <= 2e-3;
    if (best_rel > 1e-2) {
      ++atol_used;
      e2e_worst_abs = std::max(e2e_worst_abs, best_abs);
    }
    if (best_rel > e2e_worst_rel && tensor_ok) e2e_worst_rel = best_rel;
    if (!tensor_ok) {
      e2e_ok = false;
      e2e_worst_name = names[k];
      e2e_worst_rel = std::max(e2e_worst_rel, best_rel);
    }
  }

  const double wall = seconds_since(t0);
  const bool time_ok = wall < 300.0;
  detail = "ops worst rel " + fmt("%.2e", op_worst) + " at " + op_worst_name +
           " (tol 1e-3, floor 0.05); end-to-end " + std::to_string(sample) + "/" +
           std::to_string(total) + " tensors, worst rel " + fmt("%.2e", e2e_worst_rel) +
           " (tol 1e-2), atol path " + std::to_string(atol_used) + " tensor(s) worst abs " +
           fmt("%.2e", e2e_worst_abs) + " (atol 2e-3)";
  if (!e2e_ok) detail += " FAILED at " + e2e_worst_name;
  detail += "; " + fmt("%.1f", wall) + "s (budget 300s)";
  return ops_ok && e2e_ok && time_ok;
}

// ---------------------------------------------------------------------
// Criterion 2: loss law
// ---------------------------------------------------------------------

bool criterion2(std::string& detail) {
  // (a) unit value: h = 0.5, y = 1, beta = 10.
  Tensor pred = Tensor::from_data({1, 1, 1, 1}, {0.5f});
  Tensor one = Tensor::from_data({1, 1, 1, 1}, {1.0f});
  Tensor zero = Tensor::from_data({1, 1, 1, 1}, {0.0f});
  Tape t0;
  Tensor unit = train::weighted_logistic_loss(pred, one, train::LossConfig{}, &t0);
  const double unit_err = std::abs(static_cast<double>(unit.values()[0]) - 10.0 * std::log(2.0));
  const bool unit_ok = unit_err <= 1e-6;

  // (b) mixed-label stationary point: one shared probability fed by both
  // a positive and a negative pixel converges to beta/(1+beta) under
  // plain gradient descent on the logit.
  Tensor z = Tensor::zeros({1, 1, 1, 1});
  const int steps = 5000;
  const float lr = 0.5f;
  for (int s = 0; s < steps; ++s) {
    Tape tape;
    Tensor h = sigmoid(z, &tape);
    Tensor lp = train::weighted_logistic_loss(h, one, train::LossConfig{}, &tape);
    Tensor ln = train::weighted_logistic_loss(h, zero, train::LossConfig{}, &tape);
    Tensor total = add(lp, ln, &tape);
    z.zero_grad();
    tape.backward(total);
    z.mutable_values()[0] -= lr * z.grad()[0];
  }
  const double h_final = 1.0 / (1.0 + std::exp(-static_cast<double>(z.values()[0])));
  const double fp_err = std::abs(h_final - 10.0 / 11.0);
  const bool fp_ok = fp_err <= 1e-3;

  detail = "|loss(0.5,1,beta 10) - 10 ln 2| = " + fmt("%.2e", unit_err) +
           " (tol 1e-6); |h - 10/11| = " + fmt("%.2e", fp_err) + " after " +
           std::to_string(steps) + " steps (tol 1e-3)";
  return unit_ok && fp_ok;
}

// ---------------------------------------------------------------------
// Criterion 3: architecture wiring on three distinct specs
// ---------------------------------------------------------------------

graph::NetworkSpec pooled_spec() {
  graph::NetworkSpec spec = graph::NetworkSpec::desk_default();
  spec.backbone.stem_kernel = 5;
  spec.backbone.stem_stride = 1;
  spec.backbone.stem_pool = true;
  spec.backbone.stages = {graph::StageSpec{1, 8, 2}, graph::StageSpec{2, 16, 2},
                          graph::StageSpec{1, 24, 2}, graph::StageSpec{1, 48, 2}};
  spec.path.fusions = {graph::FusionSpec{1, 24, 1, 1}, graph::FusionSpec{1, 24, 1, 1},
                       graph::FusionSpec{1, 24, 1, 1}};
  spec.image_path_channels = 8;
  spec.image_path_rcus = 1;
  spec.output_scale = graph::OutputScale::full;
  return spec;
}

graph::NetworkSpec plateau_spec() {
  Config cfg;
  for (int s = 1; s <= 4; ++s) {
    cfg.set("net.stage" + std::to_string(s) + ".channels", "24");
    cfg.set("net.stage" + std::to_string(s) + ".blocks", "1");
  }
  for (int f = 1; f <= 3; ++f) {
    cfg.set("net.path.fusion" + std::to_string(f) + ".crp_blocks", "3");
    cfg.set("net.path.fusion" + std::to_string(f) + ".fused_channels", "16");
  }
  cfg.set("net.image_path.channels", "12");
  return graph::NetworkSpec::from_config(cfg);
}

Tensor sine_input(int h, int w) {
  Shape s{1, 3, h, w};
  std::vector<float> v(static_cast<std::size_t>(s.numel()));
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = 0.5f + 0.45f * static_cast<float>(std::sin(0.37 * static_cast<double>(i + 1)));
  return Tensor::from_data(s, std::move(v));
}

bool criterion3(std::string& detail) {
  const graph::NetworkSpec specs[3] = {graph::NetworkSpec::desk_default(), pooled_spec(),
                                       plateau_spec()};
  const char* spec_names[3] = {"desk", "pooled", "plateau"};
  const int h = 64, w = 96;
  double worst_uniform = 0.0;
  bool ok = true;
  std::string fail;

  for (int si = 0; si < 3; ++si) {
    const graph::NetworkSpec& spec = specs[si];
    graph::RcnModel model(spec, 5);

    // Ladder resolutions and fused widths from a traced forward pass.
    Tape tape;
    graph::ForwardTrace trace;
    model.forward(model.normalize(sine_input(h, w)), &tape, &trace);
    if (trace.backbone.size() != 4 || trace.fused.size() != spec.path.fusions.size()) {
      ok = false;
      fail = std::string(spec_names[si]) + ": trace sizes";
      continue;
    }
    for (int level = 0; level < 4; ++level) {
      const int reduction = 4 << level;  // exactly 1/4, 1/8, 1/16, 1/32
      const Shape& fs = trace.backbone[level].shape();
      if (fs.h != h / reduction || fs.w != w / reduction ||
          fs.c != spec.backbone.stages[level].channels) {
        ok = false;
        fail = std::string(spec_names[si]) + ": ladder level " + std::to_string(level);
      }
    }
    const int top = static_cast<int>(spec.path.fusions.size()) - 1;
    for (int f = 0; f <= top; ++f) {
      const int reduction = 4 << (top - f);  // climbs back toward 1/4
      const Shape& fs = trace.fused[f].shape();
      if (fs.h != h / reduction || fs.w != w / reduction ||
          fs.c != spec.path.fusions[f].fused_channels) {
        ok = false;
        fail = std::string(spec_names[si]) + ": fusion " + std::to_string(f);
      }
    }

    // Zeroed convolutions and a planted bias must give a uniform
    // sigmoid(bias) probability map at the image extent.
    model.params().for_each([](const std::string& name, Tensor& t) {
      if (name.size() > 7 && name.compare(name.size() - 7, 7, ".weight") == 0)
        std::fill(t.mutable_values().begin(), t.mutable_values().end(), 0.0f);
    });
    {
      Tensor bias = model.params().get("head.conv.bias");
      std::fill(bias.mutable_values().begin(), bias.mutable_values().end(), 0.4f);
    }
    ImageU8 img = ImageU8::filled(h, w, 3, 0);
    Rng pix(33 + si);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        img.set(y, x, static_cast<std::uint8_t>(pix.uniform_int(256)));
    const ContourPrediction pred = model.predict(img);
    if (pred.h != h || pred.w != w) {
      ok = false;
      fail = std::string(spec_names[si]) + ": output extent";
    }
    const double expected = 1.0 / (1.0 + std::exp(-0.4));
    float lo = 1.0f, hi = 0.0f;
    for (float v : pred.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double dev =
        std::max(std::abs(static_cast<double>(lo) - expected), std::abs(static_cast<double>(hi) - expected));
    worst_uniform = std::max(worst_uniform, dev);
    if (dev > 1e-6) {
      ok = false;
      fail = std::string(spec_names[si]) + ": nonuniform map (spread " +
             fmt("%.2e", static_cast<double>(hi - lo)) + ")";
    }
  }

  detail = "3 specs (desk/pooled/plateau): ladder exactly 1/4..1/32, RCU/CRP extents match the "
           "declared schedule, MRF widths match fused_channels; zeroed convs give uniform "
           "sigmoid(0.4) maps, worst |p - sigma(0.4)| = " +
           fmt("%.2e", worst_uniform) + " (tol 1e-6)";
  if (!ok) detail += "; FAILED at " + fail;
  return ok;
}

// ---------------------------------------------------------------------
// Criterion 4: learning signal on the synthetic corpus
// ---------------------------------------------------------------------

bool criterion4(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();

  forge::SynthOptions opt;  // 64 images, 96x96, val 16, shapes + distractors
  opt.seed = 11;
  std::vector<forge::SynthImage> train_set, val_set;
  for (int i = 0; i < opt.count; ++i) {
    forge::SynthImage s = forge::synth_image(opt, static_cast<std::uint64_t>(i));
    (i < opt.count - opt.val_count ? train_set : val_set).push_back(std::move(s));
  }

  std::vector<train::LoadedImage> loaded(train_set.size());
  for (std::size_t i = 0; i < train_set.size(); ++i) {
    loaded[i].image = image_to_tensor(train_set[i].image);
    loaded[i].labels = train_set[i].labels;
  }
  train::Corpus corpus = train::expand_annotators(loaded, "all", 0);

  graph::RcnModel model(graph::NetworkSpec::desk_default(), 21);
  Rng rng = Rng(21).split(0x747261696eULL);
  train::StageConfig stage;
  stage.epochs = 20;
  stage.images_per_epoch = 64;
  stage.lr = 0.02f;
  stage.lr_decay = 0.93f;
  train::AugmentConfig aug;  // crop 64, vflip 0.5, scale 0.7..1.3
  train::LossConfig loss;    // beta 10
  train::run_stage(stage, model, corpus, aug, loss, rng);
  const double train_wall = seconds_since(t0);

  // Held-out benchmark and the contour-vs-distractor margin.
  std::vector<ContourPrediction> preds;
  std::vector<GroundTruthSet> gts;
  double contour_sum = 0.0, distract_sum = 0.0;
  long contour_n = 0, distract_n = 0;
  for (const forge::SynthImage& v : val_set) {
    ContourPrediction p = model.predict(v.image);
    for (int y = 0; y < v.image.h; ++y)
      for (int x = 0; x < v.image.w; ++x) {
        if (v.labels[0].at(y, x)) {
          contour_sum += p.at(y, x);
          ++contour_n;
        }
        if (v.distractors.at(y, x)) {
          distract_sum += p.at(y, x);
          ++distract_n;
        }
      }
    preds.push_back(std::move(p));
    gts.push_back(GroundTruthSet{v.labels});
  }
  bench::BenchmarkOptions bo;
  bo.apply_nms = true;
  const double ods = bench::benchmark(preds, gts, bo).ods;
  const double margin = contour_sum / contour_n - distract_sum / distract_n;

  const bool ok = ods >= 0.70 && margin >= 0.2 && train_wall <= 1800.0;
  detail = "held-out ODS " + fmt("%.4f", ods) + " (need >= 0.70); contour-vs-distractor margin " +
           fmt("%.3f", margin) + " (need >= 0.2); training " + fmt("%.0f", train_wall) +
           "s (budget 1800s), 64-image corpus, 16 held out";
  return ok;
}

// ---------------------------------------------------------------------
// Criterion 5: enrichment effect
// ---------------------------------------------------------------------

graph::RcnModel train_desk(const std::vector<Tensor>& images, const std::vector<LabelMap>& labels,
                           int epochs, std::uint64_t model_seed, std::uint64_t rng_seed) {
  std::vector<train::LoadedImage> loaded(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    loaded[i].image = images[i];
    loaded[i].labels = {labels[i]};
  }
  train::Corpus corpus = train::expand_annotators(loaded, "all", 0);
  train::AugmentConfig aug;
  aug.crop_h = aug.crop_w = 64;
  aug.scale_lo = aug.scale_hi = 1.0f;
  train::LossConfig loss;
  train::StageConfig stage;
  stage.epochs = epochs;
  stage.images_per_epoch = 48;
  stage.lr = 0.02f;
  stage.lr_decay = 0.93f;
  graph::RcnModel model(graph::NetworkSpec::desk_default(), model_seed);
  Rng rng(rng_seed);
  train::run_stage(stage, model, corpus, aug, loss, rng);
  return model;
}

bool criterion5(std::string& detail) {
  forge::SynthOptions opt;
  opt.count = 32;
  opt.canvas_h = opt.canvas_w = 64;
  opt.seed = 31;
  opt.val_count = 8;
  opt.min_shapes = 1;
  opt.max_shapes = 3;
  opt.min_distractors = 2;
  opt.max_distractors = 4;

  std::vector<forge::SynthImage> train_set, val_set;
  for (int i = 0; i < opt.count; ++i) {
    forge::SynthImage s = forge::synth_image(opt, static_cast<std::uint64_t>(i));
    (i < opt.count - opt.val_count ? train_set : val_set).push_back(std::move(s));
  }
  std::vector<Tensor> images;
  std::vector<LabelMap> degraded;
  Rng drop_rng(5);
  for (std::size_t i = 0; i < train_set.size(); ++i) {
    images.push_back(image_to_tensor(train_set[i].image));
    Rng r = drop_rng.split(i);
    degraded.push_back(forge::degrade_labels(train_set[i].labels[0], 0.3, r));
  }

  // Baseline model on the degraded labels.
  graph::RcnModel m0 = train_desk(images, degraded, 16, 43, 17);

  // Enrichment: positives may only be added, and only where the model is
  // confident at the 0.9 threshold.
  long added = 0, added_unconfident = 0, removed = 0;
  std::vector<LabelMap> enriched;
  for (std::size_t i = 0; i < train_set.size(); ++i) {
    const ContourPrediction pred = m0.predict(train_set[i].image);
    LabelMap e = forge::enrich_labels(degraded[i], pred, 0.9f);
    for (std::size_t p = 0; p < e.pixels.size(); ++p) {
      if (e.pixels[p] && !degraded[i].pixels[p]) {
        ++added;
        if (pred.values[p] < 0.9f) ++added_unconfident;
      }
      if (!e.pixels[p] && degraded[i].pixels[p]) ++removed;
    }
    enriched.push_back(std::move(e));
  }

  // Fresh retrain on the enriched labels with identical seeds.
  graph::RcnModel m1 = train_desk(images, enriched, 16, 43, 17);

  bench::BenchmarkOptions bo;
  bo.thresholds = 33;
  bo.apply_nms = true;
  std::vector<GroundTruthSet> gts;
  std::vector<ContourPrediction> p0, p1;
  for (const forge::SynthImage& v : val_set) {
    gts.push_back(GroundTruthSet{v.labels});
    p0.push_back(m0.predict(v.image));
    p1.push_back(m1.predict(v.image));
  }
  const double ods0 = bench::benchmark(p0, gts, bo).ods;
  const double ods1 = bench::benchmark(p1, gts, bo).ods;

  const bool ok = added > 0 && added_unconfident == 0 && removed == 0 && ods1 >= ods0 - 0.02;
  detail = "enrichment at 0.9 added " + std::to_string(added) +
           " positives (unconfident additions " + std::to_string(added_unconfident) +
           ", removals " + std::to_string(removed) + "; both must be 0); held-out ODS " +
           fmt("%.4f", ods1) + " vs baseline " + fmt("%.4f", ods0) + ", delta " +
           fmt("%+.4f", ods1 - ods0) + " (floor -0.02)";
  return ok;
}

// ---------------------------------------------------------------------
// Criterion 6: benchmark oracle
// ---------------------------------------------------------------------

// Exact maximum bipartite matching by bitmask DP over the ground-truth
// side; independent of the production augmenting-path algorithm.
int oracle_matching(const std::vector<std::pair<int, int>>& pred,
                    const std::vector<std::pair<int, int>>& gt, double tol) {
  const int np = static_cast<int>(pred.size());
  const int ng = static_cast<int>(gt.size());
  std::vector<std::uint32_t> adj(np, 0);
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < ng; ++j) {
      const double dy = pred[i].first - gt[j].first;
      const double dx = pred[i].second - gt[j].second;
      if (std::sqrt(dy * dy + dx * dx) <= tol) adj[i] |= 1u << j;
    }
  std::map<std::pair<int, std::uint32_t>, int> memo;
  std::function<int(int, std::uint32_t)> best = [&](int i, std::uint32_t used) -> int {
    if (i == np) return 0;
    const auto key = std::make_pair(i, used);
    const auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    int value = best(i + 1, used);
    for (int j = 0; j < ng; ++j)
      if ((adj[i] >> j & 1u) && !(used >> j & 1u))
        value = std::max(value, 1 + best(i + 1, used | 1u << j));
    memo[key] = value;
    return value;
  };
  return best(0, 0);
}

bool criterion6(std::string& detail) {
  // (a) correspond vs the exhaustive oracle on random instances capped at
  // 20 boundary pixels per side.
  Rng rng(909);
  const double tolerances[] = {0.8, 1.0, 1.5, 2.3, 3.0};
  int checked = 0, mismatches = 0;
  int instance_stream = 0;
  while (checked < 500) {
    Rng r = rng.split(instance_stream++);
    const int h = 9, w = 9;
    LabelMap pred = LabelMap::zeros(h, w), gt = LabelMap::zeros(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (r.bernoulli(0.12)) pred.set(y, x, 1);
        if (r.bernoulli(0.12)) gt.set(y, x, 1);
      }
    const auto pp = positives(pred), gp = positives(gt);
    if (pp.size() > 20 || gp.size() > 20) continue;  // keep the DP exhaustive
    const double tol = tolerances[checked % 5];
    const bench::MatchCounts c = bench::correspond(pred, gt, tol);
    const int oracle = oracle_matching(pp, gp, tol);
    if (c.tp_pred != oracle || c.tp_gt != oracle) ++mismatches;
    ++checked;
  }

  // (b) the frozen three-image corpus, hand-computed end to end:
  // pooled counts per threshold give ODS = OIS = 10/13 at t = 0.2 and
  // AP = (5/6)*(5/7) = 25/42.
  std::vector<ContourPrediction> preds(3, ContourPrediction::zeros(5, 5));
  std::vector<GroundTruthSet> gts(3);
  gts[0].annotators.push_back(points_to_label(5, 5, {{1, 1}, {1, 2}, {1, 3}}));
  preds[0].set(1, 1, 0.9f);
  preds[0].set(1, 2, 0.6f);
  preds[0].set(1, 3, 0.3f);
  preds[0].set(3, 3, 0.8f);
  gts[1].annotators.push_back(points_to_label(5, 5, {{2, 2}}));
  preds[1].set(2, 2, 0.55f);
  preds[1].set(0, 0, 0.95f);
  gts[2].annotators.push_back(points_to_label(5, 5, {{0, 4}, {4, 0}}));
  preds[2].set(0, 4, 0.45f);
  bench::BenchmarkOptions toy;
  toy.thresholds = 4;
  const bench::BenchmarkSummary s = bench::benchmark(preds, gts, toy);
  const double toy_err = std::max(
      {std::abs(s.ods - 10.0 / 13.0), std::abs(s.ois - 10.0 / 13.0), std::abs(s.ap - 25.0 / 42.0),
       std::abs(s.ods_threshold - 0.2)});

  // (c) perfect predictions score 1.0 on every metric.
  std::vector<ContourPrediction> perfect;
  std::vector<GroundTruthSet> pg;
  Rng prng(77);
  for (int i = 0; i < 3; ++i) {
    LabelMap m = LabelMap::zeros(16, 16);
    for (int k = 0; k < 12; ++k) m.set(prng.uniform_int(16), prng.uniform_int(16), 1);
    ContourPrediction p = ContourPrediction::zeros(16, 16);
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x)
        if (m.at(y, x)) p.set(y, x, 1.0f);
    perfect.push_back(std::move(p));
    pg.push_back(GroundTruthSet{{m}});
  }
  const bench::BenchmarkSummary ps = bench::benchmark(perfect, pg, {});
  const double perfect_err =
      std::max({std::abs(ps.ods - 1.0), std::abs(ps.ois - 1.0), std::abs(ps.ap - 1.0)});

  const bool ok = mismatches == 0 && toy_err <= 1e-9 && perfect_err <= 1e-12;
  detail = std::to_string(checked) + " random instances vs exhaustive matching, " +
           std::to_string(mismatches) + " mismatches (need 0); frozen 3-image corpus max "
           "|error| = " + fmt("%.1e", toy_err) + " vs ODS=OIS=10/13, AP=25/42 (tol 1e-9); "
           "perfect predictions max |error| = " + fmt("%.1e", perfect_err) + " (tol 1e-12)";
  return ok;
}

// ---------------------------------------------------------------------
// Criterion 7: NMS properties
// ---------------------------------------------------------------------

ContourPrediction vertical_bar(int h, int w, int x0, float left, float right) {
  ContourPrediction p = ContourPrediction::zeros(h, w);
  for (int y = 0; y < h; ++y) {
    p.set(y, x0, left);
    p.set(y, x0 + 1, right);
  }
  return p;
}

ContourPrediction quantize(const ContourPrediction& p, int levels) {
  ContourPrediction out = p;
  for (float& v : out.values)
    v = std::round(v * static_cast<float>(levels)) / static_cast<float>(levels);
  return out;
}

std::vector<std::pair<int, int>> pred_survivors(const ContourPrediction& p) {
  std::vector<std::pair<int, int>> out;
  for (int y = 0; y < p.h; ++y)
    for (int x = 0; x < p.w; ++x)
      if (p.at(y, x) > 0.0f) out.emplace_back(y, x);
  return out;
}

bool criterion7(std::string& detail) {
  // (a) idempotence on 100 random maps.
  int non_idempotent = 0;
  Rng rng(321);
  for (int i = 0; i < 100; ++i) {
    Rng r = rng.split(i);
    ContourPrediction p = ContourPrediction::zeros(48, 48);
    for (float& v : p.values) v = static_cast<float>(r.uniform01());
    const ContourPrediction once = bench::nms_thin(p);
    const ContourPrediction twice = bench::nms_thin(once);
    if (std::memcmp(once.values.data(), twice.values.data(),
                    once.values.size() * sizeof(float)) != 0)
      ++non_idempotent;
  }

  // (b) single-pixel ridges are invariant: a rectangle ring plus a
  // diagonal pass through unchanged.
  ContourPrediction ridge = ContourPrediction::zeros(24, 30);
  for (int x = 4; x <= 25; ++x) {
    ridge.set(4, x, 0.9f);
    ridge.set(19, x, 0.9f);
  }
  for (int y = 4; y <= 19; ++y) {
    ridge.set(y, 4, 0.9f);
    ridge.set(y, 25, 0.9f);
  }
  for (int d = 0; d < 12; ++d) ridge.set(6 + d, 28 - 16 + d, 0.0f);  // keep ring isolated
  ContourPrediction diag = ContourPrediction::zeros(24, 30);
  for (int d = 0; d < 12; ++d) diag.set(6 + d, 8 + d, 0.8f);
  const bool ridge_ok =
      std::memcmp(bench::nms_thin(ridge).values.data(), ridge.values.data(),
                  ridge.values.size() * sizeof(float)) == 0 &&
      std::memcmp(bench::nms_thin(diag).values.data(), diag.values.data(),
                  diag.values.size() * sizeof(float)) == 0;

  // (c) a 1e-4 plateau difference that 16-bit quantization resolves but
  // 8-bit collapses into a tie. The tie falls back to the deterministic
  // low-coordinate edge; the resolved bar keeps the true maximum.
  const int h = 24, w = 20, x0 = 9;
  const ContourPrediction fine = vertical_bar(h, w, x0, 0.5f, 0.5001f);
  const auto kept16 = pred_survivors(bench::nms_thin(quantize(fine, 65535)));
  const auto kept8 = pred_survivors(bench::nms_thin(quantize(fine, 255)));
  bool plateau_ok = kept16.size() == static_cast<std::size_t>(h) &&
                    kept8.size() == static_cast<std::size_t>(h);
  for (const auto& [y, x] : kept16) plateau_ok = plateau_ok && x == x0 + 1;  // true max
  for (const auto& [y, x] : kept8) plateau_ok = plateau_ok && x == x0;       // tie rule

  const bool ok = non_idempotent == 0 && ridge_ok && plateau_ok;
  detail = "idempotent on " + std::to_string(100 - non_idempotent) +
           "/100 random maps (bitwise); 1-px ring and diagonal invariant: " +
           (ridge_ok ? "yes" : "NO") + "; 1e-4 plateau resolved at 16-bit (kept column " +
           std::to_string(x0 + 1) + "), tied at 8-bit (kept column " + std::to_string(x0) +
           "): " + (plateau_ok ? "yes" : "NO");
  return ok;
}

// ---------------------------------------------------------------------
// Criterion 8: multi-annotator disagreement
// ---------------------------------------------------------------------

struct DisagreementImage {
  ImageU8 image;
  LabelMap full;    // annotator 0: consensus lines plus the whole stripe
  LabelMap strict;  // annotator 1: consensus lines only
  int stripe_x = 0;
};
constexpr int kBand = 12;

// Constant background with two 2-px dark consensus lines (both
// annotators) and one 12-px bright stripe claimed in full by annotator 0
// and ignored by annotator 1: every stripe pixel is a disputed pixel.
DisagreementImage make_disagreement_image(Rng rng) {
  const int h = 64, w = 64;
  DisagreementImage out;
  out.full = LabelMap::zeros(h, w);
  out.strict = LabelMap::zeros(h, w);
  const int sx = 6 + rng.uniform_int(w - 12 - kBand);
  out.stripe_x = sx;
  std::vector<int> lines;
  while (lines.size() < 2) {
    const int x = 4 + rng.uniform_int(w - 10);
    if (x >= sx - 6 && x < sx + kBand + 5) continue;
    bool clear = true;
    for (int e : lines)
      if (std::abs(e - x) < 8) clear = false;
    if (clear) lines.push_back(x);
  }
  std::vector<float> level(w, 0.35f);
  for (int e : lines) {
    level[e] = 0.08f;
    level[e + 1] = 0.08f;
  }
  for (int x = sx; x < sx + kBand; ++x) level[x] = 0.62f;
  out.image = ImageU8::filled(h, w, 3, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float noise = static_cast<float>(rng.uniform01() - 0.5) * 0.02f;
      out.image.set(y, x, static_cast<std::uint8_t>(std::lround(
                              std::clamp(level[x] + noise, 0.0f, 1.0f) * 255.0f)));
    }
  for (int e : lines)
    for (int y = 0; y < h; ++y) {
      out.full.set(y, e, 1);
      out.full.set(y, e + 1, 1);
      out.strict.set(y, e, 1);
      out.strict.set(y, e + 1, 1);
    }
  for (int x = sx; x < sx + kBand; ++x)
    for (int y = 0; y < h; ++y) out.full.set(y, x, 1);
  out.full.annotator_id = 0;
  out.strict.annotator_id = 1;
  return out;
}

// Mean prediction over the stripe's central four columns, interior rows.
double stripe_mean(const graph::RcnModel& model, const std::vector<DisagreementImage>& imgs) {
  double sum = 0.0;
  long n = 0;
  for (const DisagreementImage& di : imgs) {
    const ContourPrediction pred = model.predict(di.image);
    for (int y = 4; y < di.image.h - 4; ++y)
      for (int x = di.stripe_x + kBand / 2 - 2; x < di.stripe_x + kBand / 2 + 2; ++x) {
        sum += pred.at(y, x);
        ++n;
      }
  }
  return sum / static_cast<double>(n);
}

bool criterion8(std::string& detail) {
  Rng corpus_rng(77);
  std::vector<DisagreementImage> imgs;
  for (int i = 0; i < 12; ++i) imgs.push_back(make_disagreement_image(corpus_rng.split(i)));
  std::vector<train::LoadedImage> loaded(imgs.size());
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    loaded[i].image = image_to_tensor(imgs[i].image);
    loaded[i].labels = {imgs[i].full, imgs[i].strict};
  }

  train::AugmentConfig aug;
  aug.crop_h = aug.crop_w = 64;
  aug.scale_lo = aug.scale_hi = 1.0f;
  // The disputed pixels see label 1 (weight beta) and label 0 (weight 1)
  // in balanced alternation, so the scalar fixed point is beta/(1+beta).
  // beta = 5 puts it at 5/6, strictly inside the (0.1, 0.9) band that the
  // criterion demands; beta = 10 would park it on the 10/11 boundary.
  train::LossConfig loss;
  loss.beta = 5.0f;

  double mean_all = 0.0, mean_single = 0.0;
  for (const char* mode : {"all", "single"}) {
    train::Corpus corpus = train::expand_annotators(loaded, mode, 0);
    graph::RcnModel model(graph::NetworkSpec::desk_default(), 99);
    Rng rng(55);
    // Stage A learns the structure; the low-rate stage B damps the
    // label-conflict oscillation so the compromise is read at rest.
    train::StageConfig a;
    a.epochs = 16;
    a.images_per_epoch = 48;
    a.lr = 0.03f;
    a.lr_decay = 0.93f;
    train::run_stage(a, model, corpus, aug, loss, rng);
    train::StageConfig b;
    b.epochs = 8;
    b.images_per_epoch = 48;
    b.lr = 0.004f;
    b.lr_decay = 0.75f;
    train::run_stage(b, model, corpus, aug, loss, rng);
    (std::strcmp(mode, "all") == 0 ? mean_all : mean_single) = stripe_mean(model, imgs);
  }

  const bool ok = mean_all > 0.1 && mean_all < 0.9 && mean_single > 0.9;
  detail = "disputed-pixel mean: all-annotator " + fmt("%.4f", mean_all) +
           " (need inside (0.1, 0.9); beta 5 fixed point 5/6 = 0.833); single-annotator " +
           fmt("%.4f", mean_single) + " (need > 0.9)";
  return ok;
}

// ---------------------------------------------------------------------
// Criterion 9: formats and end-to-end reproducibility
// ---------------------------------------------------------------------

bool criterion9(std::string& detail) {
  TempDir tmp;

  // (a) checkpoint round trip, bit for bit, twice over.
  graph::RcnModel model(graph::NetworkSpec::desk_default(), 77);
  const std::string ck1 = tmp.file("a.rcnk");
  const std::string ck2 = tmp.file("b.rcnk");
  save_checkpoint(model.params(), ck1);
  ParameterStore restored = load_checkpoint(ck1);
  save_checkpoint(restored, ck2);
  bool ck_ok = read_bytes(ck1) == read_bytes(ck2) && !read_bytes(ck1).empty();
  model.params().for_each([&](const std::string& name, const Tensor& t) {
    if (!restored.contains(name)) {
      ck_ok = false;
      return;
    }
    const Tensor r = restored.get(name);
    if (!(r.shape() == t.shape()) ||
        std::memcmp(r.values().data(), t.values().data(), t.values().size() * sizeof(float)) != 0)
      ck_ok = false;
  });

  // (b) 16-bit PGM round trip on the full quantization lattice.
  ContourPrediction lattice = ContourPrediction::zeros(64, 64);
  Rng prng(13);
  for (float& v : lattice.values)
    v = static_cast<float>(prng.uniform_int(65536)) / 65535.0f;
  const std::string pgm1 = tmp.file("a.pgm");
  const std::string pgm2 = tmp.file("b.pgm");
  save_prediction(pgm1, lattice);
  const ContourPrediction reloaded = load_prediction(pgm1);
  save_prediction(pgm2, reloaded);
  const bool pgm_ok =
      reloaded.h == lattice.h && reloaded.w == lattice.w &&
      std::memcmp(reloaded.values.data(), lattice.values.data(),
                  lattice.values.size() * sizeof(float)) == 0 &&
      read_bytes(pgm1) == read_bytes(pgm2) && !read_bytes(pgm1).empty();

  // (c) the seeded forge -> train -> predict -> eval pipeline writes the
  // same BenchmarkSummary CSVs twice.
  const auto run_pipeline = [](const std::string& root) {
    pipeline::ForgeArgs fa;
    fa.out_dir = root + "/corpus";
    fa.synth.count = 8;
    fa.synth.canvas_h = fa.synth.canvas_w = 48;
    fa.synth.seed = 4;
    fa.synth.val_count = 2;
    const pipeline::ForgeResult fr = pipeline::run_forge(fa);

    pipeline::TrainArgs ta;
    ta.spec = graph::NetworkSpec::desk_default();
    train::StageConfig st;
    st.corpus = fr.manifest_path;
    st.epochs = 2;
    st.images_per_epoch = 6;
    st.lr = 0.01f;
    st.lr_decay = 0.9f;
    ta.plan.stages = {st};
    ta.plan.augment.crop_h = ta.plan.augment.crop_w = 48;
    ta.seed = 5;
    ta.checkpoint_out = root + "/model.rcnk";
    pipeline::run_train(ta);

    pipeline::PredictArgs pa;
    pa.spec = ta.spec;
    pa.checkpoint = ta.checkpoint_out;
    pa.manifest = fr.manifest_path;
    pa.split = "val";
    pa.out_dir = root + "/preds";
    pipeline::run_predict(pa);

    pipeline::EvalArgs ea;
    ea.pred_dir = root + "/preds";
    ea.manifest = fr.manifest_path;
    ea.split = "val";
    ea.report_dir = root + "/report";
    ea.bench.thresholds = 19;
    return pipeline::run_eval(ea).summary.ods;
  };
  const std::string rootA = tmp.file("runA");
  const std::string rootB = tmp.file("runB");
  fs::create_directories(rootA);
  fs::create_directories(rootB);
  const double odsA = run_pipeline(rootA);
  const double odsB = run_pipeline(rootB);
  const std::string prA = read_bytes(rootA + "/report/pr.csv");
  const std::string prB = read_bytes(rootB + "/report/pr.csv");
  const std::string smA = read_bytes(rootA + "/report/summary.csv");
  const std::string smB = read_bytes(rootB + "/report/summary.csv");
  const bool pipe_ok = !prA.empty() && prA == prB && !smA.empty() && smA == smB && odsA == odsB;

  const bool ok = ck_ok && pgm_ok && pipe_ok;
  detail = std::string("checkpoint round trip bit-exact: ") + (ck_ok ? "yes" : "NO") +
           "; 16-bit PGM round trip bit-exact: " + (pgm_ok ? "yes" : "NO") +
           "; two seeded forge->train->predict->eval runs, pr.csv and summary.csv byte-identical: " +
           (pipe_ok ? "yes" : "NO") + " (ODS " + fmt("%.6f", odsA) + ")";
  return ok;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    bool (*fn)(std::string&);
  };
  const Criterion criteria[] = {
      {"gradient correctness", criterion1},
      {"loss law", criterion2},
      {"architecture wiring", criterion3},
      {"learning signal", criterion4},
      {"enrichment effect", criterion5},
      {"benchmark oracle", criterion6},
      {"NMS properties", criterion7},
      {"multi-annotator training", criterion8},
      {"formats and reproducibility", criterion9},
  };

  int failures = 0;
  for (int i = 0; i < 9; ++i) {
    std::string detail;
    bool pass = false;
    try {
      pass = criteria[i].fn(detail);
    } catch (const std::exception& e) {
      detail += std::string(detail.empty() ? "" : "; ") + "exception: " + e.what();
    }
    std::printf("[%d/9] %s %s: %s\n", i + 1, pass ? "PASS" : "FAIL", criteria[i].name,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  return failures;
}
