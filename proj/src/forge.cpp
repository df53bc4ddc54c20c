#include "rcnkit/forge.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rcnkit/errors.hpp"
#include "rcnkit/image_io.hpp"
#include "rcnkit/log.hpp"

namespace fs = std::filesystem;

namespace rcnkit::forge {

LabelMap mask_to_contours(const SegmentationMask& mask, const std::set<int>& classes) {
  if (mask.h <= 0 || mask.w <= 0) throw ConfigError("mask_to_contours: empty mask");
  if (classes.empty()) throw ConfigError("mask_to_contours: empty class set");
  LabelMap out = LabelMap::zeros(mask.h, mask.w);
  out.source = LabelSource::mask_derived;
  auto id_at = [&](int y, int x) {
    if (y < 0 || y >= mask.h || x < 0 || x >= mask.w) return 0;  // border = background
    return mask.at(y, x);
  };
  for (int y = 0; y < mask.h; ++y)
    for (int x = 0; x < mask.w; ++x) {
      const int id = mask.at(y, x);
      if (classes.count(id) == 0) continue;
      if (id_at(y - 1, x) != id || id_at(y + 1, x) != id || id_at(y, x - 1) != id ||
          id_at(y, x + 1) != id)
        out.set(y, x, 1);
    }
  return out;
}

LabelMap enrich_labels(const LabelMap& base, const ContourPrediction& detection,
                       float threshold) {
  if (base.h != detection.h || base.w != detection.w)
    throw ShapeError("enrich_labels: label " + std::to_string(base.h) + "x" +
                     std::to_string(base.w) + " vs detection " + std::to_string(detection.h) +
                     "x" + std::to_string(detection.w));
  if (!(threshold > 0.0f && threshold < 1.0f))
    throw ConfigError("enrich_labels: threshold must be in (0,1)");
  LabelMap out = base;
  out.source = LabelSource::enriched;
  for (std::size_t i = 0; i < out.pixels.size(); ++i)
    if (detection.values[i] >= threshold) out.pixels[i] = 1;
  return out;
}

LabelMap degrade_labels(const LabelMap& label, double drop_fraction, Rng& rng) {
  if (drop_fraction < 0.0 || drop_fraction >= 1.0)
    throw ConfigError("degrade_labels: drop_fraction must be in [0,1)");
  LabelMap out = label;
  for (auto& p : out.pixels)
    if (p != 0 && rng.bernoulli(drop_fraction)) p = 0;
  return out;
}

void CorpusManifest::save(const std::string& path) const {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("manifest: cannot open '" + path + "' for writing");
  f << "# rcnkit corpus manifest v1\n";
  for (const auto& e : entries) {
    f << e.image << '\t';
    for (std::size_t i = 0; i < e.labels.size(); ++i) {
      if (i > 0) f << ';';
      f << e.labels[i];
    }
    f << '\t' << e.split << '\n';
  }
  if (!f) throw IoError("manifest: write failed for '" + path + "'");
}

CorpusManifest CorpusManifest::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("manifest: cannot open '" + path + "'");
  CorpusManifest out;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    ManifestEntry e;
    std::istringstream ls(line);
    std::string labels_field;
    if (!std::getline(ls, e.image, '\t') || !std::getline(ls, labels_field, '\t') ||
        !std::getline(ls, e.split))
      throw IoError("manifest: malformed line " + std::to_string(line_no) + " in '" + path +
                    "'");
    std::istringstream lf(labels_field);
    std::string label;
    while (std::getline(lf, label, ';'))
      if (!label.empty()) e.labels.push_back(label);
    if (e.labels.empty())
      throw IoError("manifest: no labels on line " + std::to_string(line_no) + " in '" + path +
                    "'");
    out.entries.push_back(std::move(e));
  }
  return out;
}

std::vector<ManifestEntry> CorpusManifest::split(const std::string& tag) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries)
    if (e.split == tag) out.push_back(e);
  return out;
}

namespace {

struct Gray {
  float base, grad_amp, grad_y, grad_x;
  float value(int y, int x, int h, int w) const {
    return base + grad_amp * (grad_y * (static_cast<float>(y) / h - 0.5f) +
                              grad_x * (static_cast<float>(x) / w - 0.5f));
  }
};

void fill_rect(SegmentationMask& m, Rng& rng, int id, int margin) {
  const int max_h = std::max(8, m.h / 2), max_w = std::max(8, m.w / 2);
  const int sh = rng.uniform_int(10, max_h);
  const int sw = rng.uniform_int(10, max_w);
  const int y0 = rng.uniform_int(margin, std::max(margin, m.h - margin - sh));
  const int x0 = rng.uniform_int(margin, std::max(margin, m.w - margin - sw));
  for (int y = y0; y < std::min(m.h - margin, y0 + sh); ++y)
    for (int x = x0; x < std::min(m.w - margin, x0 + sw); ++x) m.set(y, x, id);
}

void fill_ellipse(SegmentationMask& m, Rng& rng, int id, int margin) {
  const double a = rng.uniform(6.0, std::max(7.0, m.w / 4.0));
  const double b = rng.uniform(6.0, std::max(7.0, m.h / 4.0));
  const double cx = rng.uniform(margin + a, std::max(margin + a + 1.0, m.w - margin - a));
  const double cy = rng.uniform(margin + b, std::max(margin + b + 1.0, m.h - margin - b));
  for (int y = std::max(margin, static_cast<int>(cy - b));
       y <= std::min(m.h - 1 - margin, static_cast<int>(cy + b)); ++y)
    for (int x = std::max(margin, static_cast<int>(cx - a));
         x <= std::min(m.w - 1 - margin, static_cast<int>(cx + a)); ++x) {
      const double dx = (x - cx) / a, dy = (y - cy) / b;
      if (dx * dx + dy * dy <= 1.0) m.set(y, x, id);
    }
}

void fill_polygon(SegmentationMask& m, Rng& rng, int id, int margin) {
  const int k = rng.uniform_int(3, 6);
  const double r_max = std::max(8.0, std::min(m.h, m.w) / 4.0);
  const double cx = rng.uniform(margin + r_max, std::max(margin + r_max + 1.0,
                                                         m.w - margin - r_max));
  const double cy = rng.uniform(margin + r_max, std::max(margin + r_max + 1.0,
                                                         m.h - margin - r_max));
  std::vector<double> vx(k), vy(k);
  for (int i = 0; i < k; ++i) {
    const double angle = 2.0 * 3.14159265358979323846 * (i + rng.uniform(0.0, 0.6)) / k;
    const double r = rng.uniform(0.45 * r_max, r_max);
    vx[i] = cx + r * std::cos(angle);
    vy[i] = cy + r * std::sin(angle);
  }
  // Vertices are angle-ordered around the center, so edge half-plane
  // tests with a consistent sign decide membership.
  for (int y = std::max(margin, static_cast<int>(cy - r_max));
       y <= std::min(m.h - 1 - margin, static_cast<int>(cy + r_max)); ++y)
    for (int x = std::max(margin, static_cast<int>(cx - r_max));
         x <= std::min(m.w - 1 - margin, static_cast<int>(cx + r_max)); ++x) {
      bool inside = true;
      for (int i = 0; i < k && inside; ++i) {
        const int j = (i + 1) % k;
        const double cross = (vx[j] - vx[i]) * (y - vy[i]) - (vy[j] - vy[i]) * (x - vx[i]);
        if (cross < 0.0) inside = false;
      }
      if (inside) m.set(y, x, id);
    }
}

// Cheap Chebyshev dilation for the distractor exclusion zone.
std::vector<std::uint8_t> dilate(const std::vector<std::uint8_t>& src, int h, int w,
                                 int radius) {
  std::vector<std::uint8_t> out(src.size(), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!src[static_cast<std::size_t>(y) * w + x]) continue;
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy >= 0 && yy < h && xx >= 0 && xx < w)
            out[static_cast<std::size_t>(yy) * w + xx] = 1;
        }
    }
  return out;
}

void draw_segment(LabelMap& strokes, const std::vector<std::uint8_t>& forbidden, int h, int w,
                  int y0, int x0, int y1, int x1, int thickness) {
  int dy = std::abs(y1 - y0), dx = std::abs(x1 - x0);
  const int sy = y0 < y1 ? 1 : -1, sx = x0 < x1 ? 1 : -1;
  int err = dx - dy, y = y0, x = x0;
  while (true) {
    for (int ty = 0; ty < thickness; ++ty)
      for (int tx = 0; tx < thickness; ++tx) {
        const int yy = y + ty, xx = x + tx;
        if (yy >= 0 && yy < h && xx >= 0 && xx < w &&
            !forbidden[static_cast<std::size_t>(yy) * w + xx])
          strokes.set(yy, xx, 1);
      }
    if (y == y1 && x == x1) break;
    const int e2 = 2 * err;
    if (e2 > -dy) {
      err -= dy;
      x += sx;
    }
    if (e2 < dx) {
      err += dx;
      y += sy;
    }
  }
}

constexpr float kFillPalette[] = {15.0f, 35.0f, 55.0f, 205.0f, 225.0f, 245.0f};

}  // namespace

SynthImage synth_image(const SynthOptions& opt, std::uint64_t index) {
  const int h = opt.canvas_h, w = opt.canvas_w;
  if (h < 32 || w < 32)
    throw ConfigError("synth_image: canvas must be at least 32x32, got " + std::to_string(h) +
                      "x" + std::to_string(w));
  Rng rng = Rng(opt.seed).split(0x53594e54 + index);

  SynthImage out;
  out.mask = SegmentationMask::zeros(h, w);

  // Shapes with distinct gray fills, painter's order.
  const int n_shapes = rng.uniform_int(opt.min_shapes, opt.max_shapes);
  std::vector<float> palette(std::begin(kFillPalette), std::end(kFillPalette));
  for (std::size_t i = palette.size(); i > 1; --i)
    std::swap(palette[i - 1], palette[rng.uniform_int(0, static_cast<int>(i) - 1)]);
  constexpr int kMargin = 3;
  for (int s = 0; s < n_shapes; ++s) {
    const int kind = rng.uniform_int(0, 2);
    if (kind == 0)
      fill_rect(out.mask, rng, s + 1, kMargin);
    else if (kind == 1)
      fill_ellipse(out.mask, rng, s + 1, kMargin);
    else
      fill_polygon(out.mask, rng, s + 1, kMargin);
  }

  std::set<int> classes;
  for (int s = 0; s < n_shapes; ++s) classes.insert(s + 1);
  LabelMap contour = mask_to_contours(out.mask, classes);
  contour.source = LabelSource::synthetic;
  out.labels.push_back(contour);

  // Extra annotators re-trace the same contour but miss some pixels.
  for (int a = 1; a < opt.annotators; ++a) {
    LabelMap variant = contour;
    variant.annotator_id = a;
    for (auto& p : variant.pixels)
      if (p && rng.uniform01() < 0.15) p = 0;
    out.labels.push_back(std::move(variant));
  }

  // Distractor strokes live on plain background, two pixels clear of any
  // label, so they are edges but never contours.
  std::vector<std::uint8_t> label_union(contour.pixels);
  for (const auto& l : out.labels)
    for (std::size_t i = 0; i < l.pixels.size(); ++i)
      if (l.pixels[i]) label_union[i] = 1;
  std::vector<std::uint8_t> forbidden = dilate(label_union, h, w, 2);
  for (std::size_t i = 0; i < forbidden.size(); ++i)
    if (out.mask.ids[i] != 0) forbidden[i] = 1;

  out.distractors = LabelMap::zeros(h, w);
  const int n_lines = rng.uniform_int(opt.min_distractors, opt.max_distractors);
  for (int l = 0; l < n_lines; ++l) {
    const int y0 = rng.uniform_int(1, h - 2), x0 = rng.uniform_int(1, w - 2);
    const int len = rng.uniform_int(15, std::min(40, std::min(h, w) - 2));
    const double angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    const int y1 = std::clamp(y0 + static_cast<int>(std::lround(len * std::sin(angle))), 1,
                              h - 2);
    const int x1 = std::clamp(x0 + static_cast<int>(std::lround(len * std::cos(angle))), 1,
                              w - 2);
    const int thickness = rng.uniform_int(1, 2);
    draw_segment(out.distractors, forbidden, h, w, y0, x0, y1, x1, thickness);
  }

  // Compose: textured background, flat fills, distractor strokes, noise.
  const Gray bg{static_cast<float>(rng.uniform(105.0, 135.0)),
                static_cast<float>(rng.uniform(8.0, 15.0)),
                static_cast<float>(rng.uniform(-1.0, 1.0)),
                static_cast<float>(rng.uniform(-1.0, 1.0))};
  const float distractor_shade = rng.bernoulli(0.5)
                                     ? static_cast<float>(rng.uniform(15.0, 55.0))
                                     : static_cast<float>(rng.uniform(205.0, 245.0));
  out.image = ImageU8::filled(h, w, 3, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float v;
      const int id = out.mask.at(y, x);
      if (id > 0)
        v = palette[(id - 1) % palette.size()];
      else if (out.distractors.at(y, x))
        v = distractor_shade;
      else
        v = bg.value(y, x, h, w);
      v += static_cast<float>(rng.uniform(-5.0, 5.0));
      out.image.set(y, x, static_cast<std::uint8_t>(std::clamp(v, 0.0f, 255.0f)));
    }
  return out;
}

SynthCorpus synth_corpus(const SynthOptions& opt, const std::string& out_dir) {
  if (opt.count < 1) throw ConfigError("synth_corpus: count must be >= 1");
  if (opt.val_count < 0 || opt.val_count > opt.count)
    throw ConfigError("synth_corpus: val_count must be in [0, count]");
  fs::create_directories(fs::path(out_dir) / "images");
  fs::create_directories(fs::path(out_dir) / "labels");
  fs::create_directories(fs::path(out_dir) / "distract");

  SynthCorpus corpus;
  std::int64_t positives = 0, pixels = 0;
  for (int i = 0; i < opt.count; ++i) {
    SynthImage img = synth_image(opt, static_cast<std::uint64_t>(i));
    char stem[32];
    std::snprintf(stem, sizeof stem, "img_%04d", i);

    ManifestEntry entry;
    entry.image = std::string("images/") + stem + ".png";
    save_png((fs::path(out_dir) / entry.image).string(), img.image);
    for (std::size_t a = 0; a < img.labels.size(); ++a) {
      std::string label_rel =
          std::string("labels/") + stem + "_a" + std::to_string(a) + ".png";
      save_label_png((fs::path(out_dir) / label_rel).string(), img.labels[a]);
      entry.labels.push_back(std::move(label_rel));
      positives += img.labels[a].positive_count();
      pixels += static_cast<std::int64_t>(img.labels[a].pixels.size());
    }
    save_label_png((fs::path(out_dir) / "distract" / (std::string(stem) + ".png")).string(),
                   img.distractors);
    entry.split = i < opt.count - opt.val_count ? "train" : "val";
    corpus.manifest.entries.push_back(std::move(entry));
    corpus.distractor_masks.push_back(std::move(img.distractors));
  }
  corpus.manifest_path = (fs::path(out_dir) / "manifest.tsv").string();
  corpus.manifest.save(corpus.manifest_path);
  log_info("forge: wrote " + std::to_string(opt.count) + " images to " + out_dir +
           " (positive rate " +
           std::to_string(pixels > 0 ? static_cast<double>(positives) / pixels : 0.0) + ")");
  return corpus;
}

}  // namespace rcnkit::forge
