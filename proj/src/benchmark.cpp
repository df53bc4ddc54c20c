#include "rcnkit/benchmark.hpp"

#include <algorithm>
#include <cstddef>
#include <string>

#include "rcnkit/errors.hpp"
#include "rcnkit/nms.hpp"
#include "rcnkit/parallel.hpp"

namespace rcnkit::bench {
namespace {

double ratio_or_one(std::int64_t num, std::int64_t den) {
  return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 1.0;
}

double image_f(const MatchCounts& c) {
  return f_measure(ratio_or_one(c.tp_pred, c.total_pred), ratio_or_one(c.tp_gt, c.total_gt));
}

}  // namespace

double f_measure(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

BenchmarkSummary benchmark(const std::vector<ContourPrediction>& preds,
                           const std::vector<GroundTruthSet>& gts,
                           const BenchmarkOptions& options) {
  if (preds.empty()) throw ConfigError("benchmark: no images to evaluate");
  if (preds.size() != gts.size())
    throw ShapeError("benchmark: " + std::to_string(preds.size()) + " predictions vs " +
                     std::to_string(gts.size()) + " ground-truth sets");
  const int k_count = options.thresholds;
  if (k_count < 2)
    throw ConfigError("benchmark: need at least 2 thresholds, got " + std::to_string(k_count));

  std::int64_t gt_positive = 0;
  for (const auto& set : gts) {
    if (set.annotators.empty())
      throw ConfigError("benchmark: ground-truth set has no annotator maps");
    for (const auto& m : set.annotators) gt_positive += m.positive_count();
  }
  if (gt_positive == 0)
    throw ConfigError("benchmark: ground truth has no positive pixels, recall undefined");

  std::vector<double> thresholds(static_cast<std::size_t>(k_count));
  for (int k = 0; k < k_count; ++k) thresholds[k] = static_cast<double>(k + 1) / (k_count + 1);

  // counts[image][threshold]; images are independent.
  std::vector<std::vector<MatchCounts>> counts(preds.size());
  parallel_for(preds.size(), options.threads, [&](std::size_t i) {
    const ContourPrediction thinned = options.apply_nms ? nms_thin(preds[i]) : preds[i];
    const double tol = options.tolerance_px > 0
                           ? options.tolerance_px
                           : default_tolerance(thinned.h, thinned.w);
    auto& row = counts[i];
    row.resize(thresholds.size());
    for (std::size_t k = 0; k < thresholds.size(); ++k)
      row[k] = correspond_multi(binarize(thinned, static_cast<float>(thresholds[k])), gts[i],
                                tol);
  });

  BenchmarkSummary out;
  out.pr.resize(thresholds.size());
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    MatchCounts pooled;
    for (const auto& row : counts) pooled += row[k];
    PrPoint& p = out.pr[k];
    p.threshold = thresholds[k];
    p.precision = ratio_or_one(pooled.tp_pred, pooled.total_pred);
    p.recall = ratio_or_one(pooled.tp_gt, pooled.total_gt);
    p.f = f_measure(p.precision, p.recall);
    if (p.f > out.ods) {
      out.ods = p.f;
      out.ods_threshold = p.threshold;
    }
  }

  // OIS: pick each image's best threshold (first maximum in ascending
  // threshold order), then pool those counts.
  MatchCounts ois_pool;
  for (const auto& row : counts) {
    std::size_t best = 0;
    double best_f = image_f(row[0]);
    for (std::size_t k = 1; k < row.size(); ++k) {
      const double f = image_f(row[k]);
      if (f > best_f) {
        best_f = f;
        best = k;
      }
    }
    ois_pool += row[best];
  }
  out.ois = f_measure(ratio_or_one(ois_pool.tp_pred, ois_pool.total_pred),
                      ratio_or_one(ois_pool.tp_gt, ois_pool.total_gt));

  // AP: precision as a function of recall, envelope enforced by a
  // running maximum from high recall to low, constant extension down to
  // recall 0, nothing beyond the largest achieved recall.
  std::vector<std::pair<double, double>> rp(out.pr.size());
  for (std::size_t k = 0; k < out.pr.size(); ++k)
    rp[k] = {out.pr[k].recall, out.pr[k].precision};
  std::sort(rp.begin(), rp.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t k = rp.size() - 1; k-- > 0;)
    rp[k].second = std::max(rp[k].second, rp[k + 1].second);
  double ap = rp.front().first * rp.front().second;
  for (std::size_t k = 0; k + 1 < rp.size(); ++k)
    ap += (rp[k + 1].first - rp[k].first) * 0.5 * (rp[k].second + rp[k + 1].second);
  out.ap = ap;
  return out;
}

}  // namespace rcnkit::bench
