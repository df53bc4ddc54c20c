#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "rcnkit/benchmark.hpp"
#include "rcnkit/forge.hpp"
#include "rcnkit/net_spec.hpp"
#include "rcnkit/trainer.hpp"

namespace rcnkit::pipeline {

// End-to-end commands shared by the CLI and the test harness. Everything
// here is deterministic under fixed seeds and inputs.

struct ForgeArgs {
  std::string out_dir;
  bool synthetic = true;
  forge::SynthOptions synth;
  std::string masks_dir;   // synthetic == false: root with images/ and masks/
  std::set<int> classes;   // foreground ids for mask conversion
};

struct ForgeResult {
  std::string manifest_path;
  int images = 0;
  double positive_rate = 0.0;
};

ForgeResult run_forge(const ForgeArgs& args);

struct TrainArgs {
  graph::NetworkSpec spec;
  train::TrainPlan plan;      // stages carry their corpus manifests
  std::string split = "train";
  std::string checkpoint_in;  // warm start when non-empty
  std::string checkpoint_out;
  std::string log_csv;
  std::uint64_t seed = 1;
};

struct TrainResult {
  std::vector<train::EpochLog> logs;
};

TrainResult run_train(const TrainArgs& args);

struct PredictArgs {
  graph::NetworkSpec spec;
  std::string checkpoint;
  std::vector<std::string> images;  // explicit files, or
  std::string manifest;             // a corpus manifest
  std::string split;                // manifest filter; empty = all
  std::string out_dir;
  std::string format = "pgm";  // pgm | png (both 16-bit)
  int threads = 1;
};

// Returns the written prediction paths, one per input image.
std::vector<std::string> run_predict(const PredictArgs& args);

struct EvalArgs {
  std::string pred_dir;
  std::string gt_dir;    // <stem>_a<k>.png (or <stem>.png) per image, or
  std::string manifest;  // a corpus manifest as ground-truth source
  std::string split;
  std::string report_dir;  // export CSV + SVG when non-empty
  bench::BenchmarkOptions bench{99, 0.0, /*apply_nms=*/true, 1};
};

struct EvalResult {
  bench::BenchmarkSummary summary;
  int images = 0;
};

EvalResult run_eval(const EvalArgs& args);

}  // namespace rcnkit::pipeline
