#include "rcnkit/matching.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <unordered_map>
#include <vector>

#include "rcnkit/errors.hpp"

namespace rcnkit::bench {
namespace {

struct Px {
  int y, x;
};

std::vector<Px> positives(const LabelMap& m) {
  std::vector<Px> out;
  for (int y = 0; y < m.h; ++y)
    for (int x = 0; x < m.w; ++x)
      if (m.at(y, x)) out.push_back({y, x});
  return out;
}

// Candidate GT pixels per prediction, found through a uniform grid with
// cell size >= tolerance so only the 3x3 cell neighborhood needs a scan.
std::vector<std::vector<int>> build_candidates(const std::vector<Px>& preds,
                                               const std::vector<Px>& gts, double tol) {
  const double tol2 = tol * tol;
  const int cell = std::max(1, static_cast<int>(std::ceil(tol)));
  std::unordered_map<std::int64_t, std::vector<int>> grid;
  auto key = [](int cy, int cx) {
    return (static_cast<std::int64_t>(cy) << 32) ^ static_cast<std::uint32_t>(cx);
  };
  for (int j = 0; j < static_cast<int>(gts.size()); ++j)
    grid[key(gts[j].y / cell, gts[j].x / cell)].push_back(j);

  std::vector<std::vector<int>> adj(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int cy = preds[i].y / cell, cx = preds[i].x / cell;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        auto it = grid.find(key(cy + dy, cx + dx));
        if (it == grid.end()) continue;
        for (int j : it->second) {
          const double ddy = preds[i].y - gts[j].y;
          const double ddx = preds[i].x - gts[j].x;
          if (ddy * ddy + ddx * ddx <= tol2) adj[i].push_back(j);
        }
      }
  }
  return adj;
}

// Kuhn's augmenting-path maximum bipartite matching. Returns the number
// of matched pairs and flags the matched predictions.
std::int64_t max_matching(const std::vector<Px>& preds, const std::vector<Px>& gts,
                          double tol, std::vector<char>& pred_matched) {
  const auto adj = build_candidates(preds, gts, tol);
  std::vector<int> match_gt(gts.size(), -1);
  std::vector<int> seen(gts.size(), -1);
  int stamp = -1;
  std::function<bool(int)> augment = [&](int i) {
    for (int j : adj[i]) {
      if (seen[j] == stamp) continue;
      seen[j] = stamp;
      if (match_gt[j] < 0 || augment(match_gt[j])) {
        match_gt[j] = i;
        return true;
      }
    }
    return false;
  };
  std::int64_t matched = 0;
  for (int i = 0; i < static_cast<int>(preds.size()); ++i) {
    stamp = i;
    if (augment(i)) ++matched;
  }
  for (int i : match_gt)
    if (i >= 0) pred_matched[static_cast<std::size_t>(i)] = 1;
  return matched;
}

void check_extents(const LabelMap& pred, const LabelMap& gt) {
  if (pred.h != gt.h || pred.w != gt.w)
    throw ShapeError("correspond: extent mismatch, pred " + std::to_string(pred.h) + "x" +
                     std::to_string(pred.w) + " vs gt " + std::to_string(gt.h) + "x" +
                     std::to_string(gt.w));
}

}  // namespace

double default_tolerance(int h, int w) {
  return 0.0075 * std::sqrt(static_cast<double>(h) * h + static_cast<double>(w) * w);
}

MatchCounts correspond(const LabelMap& pred, const LabelMap& gt, double tolerance_px) {
  if (tolerance_px <= 0.0)
    throw ConfigError("correspond: tolerance_px must be positive, got " +
                      std::to_string(tolerance_px));
  check_extents(pred, gt);
  const auto pred_px = positives(pred);
  const auto gt_px = positives(gt);
  std::vector<char> pred_matched(pred_px.size(), 0);
  MatchCounts c;
  c.total_pred = static_cast<std::int64_t>(pred_px.size());
  c.total_gt = static_cast<std::int64_t>(gt_px.size());
  c.tp_gt = max_matching(pred_px, gt_px, tolerance_px, pred_matched);
  c.tp_pred = c.tp_gt;  // matching is one-to-one
  return c;
}

MatchCounts correspond_multi(const LabelMap& pred, const GroundTruthSet& gts,
                             double tolerance_px) {
  if (gts.annotators.empty())
    throw ConfigError("correspond_multi: ground-truth set has no annotator maps");
  if (tolerance_px <= 0.0)
    throw ConfigError("correspond_multi: tolerance_px must be positive, got " +
                      std::to_string(tolerance_px));
  const auto pred_px = positives(pred);
  std::vector<char> matched_any(pred_px.size(), 0);
  MatchCounts c;
  c.total_pred = static_cast<std::int64_t>(pred_px.size());
  for (const LabelMap& gt : gts.annotators) {
    check_extents(pred, gt);
    const auto gt_px = positives(gt);
    std::vector<char> pred_matched(pred_px.size(), 0);
    c.tp_gt += max_matching(pred_px, gt_px, tolerance_px, pred_matched);
    c.total_gt += static_cast<std::int64_t>(gt_px.size());
    for (std::size_t i = 0; i < pred_px.size(); ++i)
      if (pred_matched[i]) matched_any[i] = 1;
  }
  for (char m : matched_any) c.tp_pred += m;
  return c;
}

}  // namespace rcnkit::bench
