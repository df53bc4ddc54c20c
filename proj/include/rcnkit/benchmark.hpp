#pragma once

#include <vector>

#include "rcnkit/maps.hpp"
#include "rcnkit/matching.hpp"

namespace rcnkit::bench {

// One point of the dataset-level precision/recall curve.
struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

struct BenchmarkSummary {
  std::vector<PrPoint> pr;
  double ods = 0.0;
  double ods_threshold = 0.0;
  double ois = 0.0;
  double ap = 0.0;
};

struct BenchmarkOptions {
  int thresholds = 99;      // evenly spaced at k/(thresholds+1), k = 1..thresholds
  double tolerance_px = 0;  // <= 0 selects default_tolerance per image
  bool apply_nms = false;   // thin predictions before binarizing
  int threads = 1;
};

double f_measure(double precision, double recall);

// Evaluates thinned predictions against multi-annotator ground truth:
// binarize at each threshold, correspond_multi, pool counts over the
// dataset. ODS is the best pooled F over shared thresholds; OIS pools
// counts at each image's own best threshold; AP integrates precision
// over recall after a running-maximum envelope from high recall down.
// Throws ConfigError when inputs are empty, thresholds < 2, or the
// ground truth has no positive pixel anywhere (undefined recall).
BenchmarkSummary benchmark(const std::vector<ContourPrediction>& preds,
                           const std::vector<GroundTruthSet>& gts,
                           const BenchmarkOptions& options = {});

}  // namespace rcnkit::bench
