#pragma once

#include <string>
#include <vector>

#include "rcnkit/benchmark.hpp"

namespace rcnkit::bench {

// Writes pr.csv (threshold,precision,recall,f), summary.csv, and pr.svg
// (PR curve over [0,1]^2 with labeled iso-F contours at 0.5..0.9) into
// `dir`, creating it if needed. Throws IoError on unwritable paths.
void export_report(const BenchmarkSummary& summary, const std::string& dir);

// Reads back a pr.csv written by export_report; values round-trip
// exactly.
std::vector<PrPoint> load_pr_csv(const std::string& path);

// Reads a full report directory (pr.csv + summary.csv) back into a
// BenchmarkSummary.
BenchmarkSummary load_report(const std::string& dir);

}  // namespace rcnkit::bench
