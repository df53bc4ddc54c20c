#pragma once

#include <set>
#include <string>
#include <vector>

#include "rcnkit/maps.hpp"
#include "rcnkit/rng.hpp"

namespace rcnkit::forge {

// Integer class-id raster, 0 = background by convention.
struct SegmentationMask {
  int h = 0, w = 0;
  std::vector<int> ids;

  static SegmentationMask zeros(int h, int w) {
    return SegmentationMask{h, w, std::vector<int>(static_cast<std::size_t>(h) * w, 0)};
  }
  int at(int y, int x) const { return ids[static_cast<std::size_t>(y) * w + x]; }
  void set(int y, int x, int v) { ids[static_cast<std::size_t>(y) * w + x] = v; }
};

// A pixel is contour iff it belongs to a selected class and at least one
// 4-neighbor carries a different id; beyond the border counts as
// background (id 0). The contour lies on the foreground side.
LabelMap mask_to_contours(const SegmentationMask& mask, const std::set<int>& classes);

// base OR (detection >= threshold); monotone in the threshold.
LabelMap enrich_labels(const LabelMap& base, const ContourPrediction& detection,
                       float threshold);

// Drops each positive pixel independently with probability
// drop_fraction in [0, 1); models the incomplete labels that the
// enrichment procedure repairs.
LabelMap degrade_labels(const LabelMap& label, double drop_fraction, Rng& rng);

// One manifest line per image: image path, ';'-joined label paths, split
// tag, tab-separated. Paths are relative to the manifest's directory.
struct ManifestEntry {
  std::string image;
  std::vector<std::string> labels;
  std::string split;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;

  void save(const std::string& path) const;
  static CorpusManifest load(const std::string& path);
  std::vector<ManifestEntry> split(const std::string& tag) const;
};

struct SynthOptions {
  int count = 64;
  int canvas_h = 96, canvas_w = 96;
  std::uint64_t seed = 1;
  int val_count = 16;        // trailing images tagged "val", the rest "train"
  int min_shapes = 1, max_shapes = 4;
  int min_distractors = 2, max_distractors = 5;
  int annotators = 1;        // extra annotators re-trace the contour with defects
};

// One generated image with everything the generator knows about it.
struct SynthImage {
  ImageU8 image;
  std::vector<LabelMap> labels;   // one per annotator
  LabelMap distractors;           // distractor strokes; disjoint from all labels
  SegmentationMask mask;
};

SynthImage synth_image(const SynthOptions& opt, std::uint64_t index);

struct SynthCorpus {
  CorpusManifest manifest;
  std::string manifest_path;
  std::vector<LabelMap> distractor_masks;  // parallel to manifest.entries
};

// Renders `count` images into `out_dir` (images/, labels/, distract/)
// and writes manifest.tsv. Fully determined by opt.seed.
SynthCorpus synth_corpus(const SynthOptions& opt, const std::string& out_dir);

}  // namespace rcnkit::forge
