#pragma once

#include <cstdint>

#include "rcnkit/maps.hpp"

namespace rcnkit::bench {

// Correspondence counts contributed by one (image, threshold) pair.
struct MatchCounts {
  std::int64_t tp_pred = 0;
  std::int64_t total_pred = 0;
  std::int64_t tp_gt = 0;
  std::int64_t total_gt = 0;

  MatchCounts& operator+=(const MatchCounts& o) {
    tp_pred += o.tp_pred;
    total_pred += o.total_pred;
    tp_gt += o.tp_gt;
    total_gt += o.total_gt;
    return *this;
  }
};

// Standard matching tolerance: 0.0075 x image diagonal.
double default_tolerance(int h, int w);

// Maximum one-to-one matching between predicted and ground-truth
// positives; a pair is matchable iff its Euclidean distance is at most
// tolerance_px. Solved exactly with augmenting paths, so tp_pred ==
// tp_gt here. Throws ShapeError on extent mismatch, ConfigError when
// tolerance_px <= 0.
MatchCounts correspond(const LabelMap& pred, const LabelMap& gt, double tolerance_px);

// Multi-annotator convention: the matching runs once per annotator map;
// a predicted pixel counts as a true positive if it matched any
// annotator (counted once in tp_pred), while recall counts accumulate
// independently per annotator (total_gt sums over maps). Throws
// ConfigError when the set is empty.
MatchCounts correspond_multi(const LabelMap& pred, const GroundTruthSet& gts,
                             double tolerance_px);

}  // namespace rcnkit::bench
