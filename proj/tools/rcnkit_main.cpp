// rcnkit: forge | train | predict | eval | report.
//
// Every subcommand reads an optional key=value --config file; explicit
// flags override file values. All randomness flows from --seed, so
// repeated runs produce identical artifacts. Errors print one JSON line
// on stderr; exit codes: 0 success, 1 runtime/IO, 2 configuration.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rcnkit/config.hpp"
#include "rcnkit/errors.hpp"
#include "rcnkit/parallel.hpp"
#include "rcnkit/pipeline.hpp"
#include "rcnkit/report.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rcnkit;

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

std::pair<int, int> parse_canvas(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos || x == 0 || x + 1 >= text.size())
    throw ConfigError("canvas must look like 96x96, got '" + text + "'");
  try {
    return {std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
  } catch (const std::exception&) {
    throw ConfigError("canvas must look like 96x96, got '" + text + "'");
  }
}

// Relative stage-corpus paths in a plan file resolve against the file.
void anchor_stage_paths(train::TrainPlan& plan, const std::string& plan_path) {
  if (plan_path.empty()) return;
  const fs::path base = fs::path(plan_path).parent_path();
  for (auto& stage : plan.stages) {
    const fs::path p(stage.corpus);
    if (p.is_relative()) stage.corpus = (base / p).string();
  }
}

struct ForgeCli {
  std::string config, out, canvas, masks_dir, classes;
  std::uint64_t seed = 1;
  long count = 0, val_count = 0, annotators = 0;
  bool synthetic = false;

  CLI::Option *o_out, *o_canvas, *o_masks, *o_classes, *o_seed, *o_count, *o_val, *o_annot,
      *o_synth;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "key=value configuration file");
    o_out = cmd->add_option("--out", out, "output corpus directory");
    o_seed = cmd->add_option("--seed", seed, "generator seed");
    o_synth = cmd->add_flag("--synthetic", synthetic, "generate the synthetic corpus");
    o_count = cmd->add_option("-n,--count", count, "number of images");
    o_canvas = cmd->add_option("--canvas", canvas, "canvas extent, e.g. 96x96");
    o_val = cmd->add_option("--val-count", val_count, "trailing images tagged val");
    o_annot = cmd->add_option("--annotators", annotators, "annotator maps per image");
    o_masks = cmd->add_option("--from-masks", masks_dir,
                              "convert a mask corpus (root with images/ and masks/)");
    o_classes = cmd->add_option("--classes", classes, "comma-separated foreground ids");
  }

  void run() const {
    Config cfg = config.empty() ? Config() : Config::from_file(config);
    if (*o_out) cfg.set("out", out);
    if (*o_seed) cfg.set("seed", std::to_string(seed));
    if (*o_synth) cfg.set("forge.mode", "synthetic");
    if (*o_masks) {
      cfg.set("forge.mode", "masks");
      cfg.set("forge.masks_dir", masks_dir);
    }
    if (*o_count) cfg.set("forge.count", std::to_string(count));
    if (*o_canvas) cfg.set("forge.canvas", canvas);
    if (*o_val) cfg.set("forge.val_count", std::to_string(val_count));
    if (*o_annot) cfg.set("forge.annotators", std::to_string(annotators));
    if (*o_classes) cfg.set("forge.classes", classes);

    pipeline::ForgeArgs args;
    args.out_dir = cfg.get_str("out");
    const std::string mode = cfg.get_str("forge.mode", "synthetic");
    if (mode == "masks") {
      args.synthetic = false;
      args.masks_dir = cfg.get_str("forge.masks_dir");
      for (long id : cfg.get_int_list("forge.classes"))
        args.classes.insert(static_cast<int>(id));
    } else if (mode == "synthetic") {
      args.synthetic = true;
      auto& s = args.synth;
      s.count = static_cast<int>(cfg.get_int("forge.count", s.count));
      if (cfg.has("forge.canvas")) {
        const auto [h, w] = parse_canvas(cfg.get_str("forge.canvas"));
        s.canvas_h = h;
        s.canvas_w = w;
      }
      s.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
      s.val_count = static_cast<int>(cfg.get_int("forge.val_count", s.val_count));
      s.min_shapes = static_cast<int>(cfg.get_int("forge.min_shapes", s.min_shapes));
      s.max_shapes = static_cast<int>(cfg.get_int("forge.max_shapes", s.max_shapes));
      s.min_distractors =
          static_cast<int>(cfg.get_int("forge.min_distractors", s.min_distractors));
      s.max_distractors =
          static_cast<int>(cfg.get_int("forge.max_distractors", s.max_distractors));
      s.annotators = static_cast<int>(cfg.get_int("forge.annotators", s.annotators));
    } else {
      throw ConfigError("forge.mode must be synthetic or masks, got '" + mode + "'");
    }

    const auto result = pipeline::run_forge(args);
    std::cout << json{{"manifest", result.manifest_path},
                      {"images", result.images},
                      {"positive_rate", result.positive_rate}}
                     .dump()
              << "\n";
  }
};

struct TrainCli {
  std::string config, plan, out, checkpoint_in, checkpoint_out, log_csv, split, variant;
  std::uint64_t seed = 1;

  CLI::Option *o_out, *o_ckin, *o_ckout, *o_log, *o_split, *o_seed, *o_variant;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "key=value configuration file");
    cmd->add_option("--plan", plan, "training plan file (plan.* keys)");
    o_out = cmd->add_option("--out", out, "artifact directory");
    o_ckin = cmd->add_option("--checkpoint-in", checkpoint_in, "warm-start checkpoint");
    o_ckout = cmd->add_option("--checkpoint-out", checkpoint_out, "checkpoint path");
    o_log = cmd->add_option("--log", log_csv, "training log CSV path");
    o_split = cmd->add_option("--split", split, "corpus split to train on");
    o_seed = cmd->add_option("--seed", seed, "training seed");
    o_variant = cmd->add_option("--variant", variant,
                                "plan variant: custom|rcn|rcn-voc|rcn-coco|rcn-voc-1");
  }

  void run() const {
    Config cfg = config.empty() ? Config() : Config::from_file(config);
    if (!plan.empty()) cfg.merge(Config::from_file(plan));
    if (*o_out) cfg.set("out", out);
    if (*o_ckin) cfg.set("train.checkpoint_in", checkpoint_in);
    if (*o_ckout) cfg.set("train.checkpoint_out", checkpoint_out);
    if (*o_log) cfg.set("train.log_csv", log_csv);
    if (*o_split) cfg.set("train.split", split);
    if (*o_seed) cfg.set("seed", std::to_string(seed));
    if (*o_variant) cfg.set("plan.variant", variant);

    pipeline::TrainArgs args;
    args.spec = graph::NetworkSpec::from_config(cfg);
    args.plan = train::plan_from_config(cfg);
    anchor_stage_paths(args.plan, plan);
    args.split = cfg.get_str("train.split", "train");
    args.checkpoint_in = cfg.get_str("train.checkpoint_in", "");
    args.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
    const std::string art_dir = cfg.get_str("out", "");
    args.checkpoint_out = cfg.get_str(
        "train.checkpoint_out",
        art_dir.empty() ? "" : (fs::path(art_dir) / "model.rcnk").string());
    args.log_csv = cfg.get_str(
        "train.log_csv",
        art_dir.empty() ? "" : (fs::path(art_dir) / "train_log.csv").string());
    if (args.checkpoint_out.empty())
      throw ConfigError("train: --out or train.checkpoint_out required");
    if (!art_dir.empty()) fs::create_directories(art_dir);

    const auto result = pipeline::run_train(args);
    std::cout << json{{"checkpoint", args.checkpoint_out},
                      {"epochs", result.logs.size()},
                      {"final_loss", result.logs.empty() ? 0.0 : result.logs.back().mean_loss},
                      {"log", args.log_csv}}
                     .dump()
              << "\n";
  }
};

struct PredictCli {
  std::string config, checkpoint, manifest, split, out, format;
  std::vector<std::string> images;
  int threads = 0;

  CLI::Option *o_ckpt, *o_manifest, *o_split, *o_out, *o_format, *o_threads;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "key=value configuration file");
    o_ckpt = cmd->add_option("--checkpoint", checkpoint, "trained checkpoint");
    cmd->add_option("--image", images, "input image (repeatable)");
    o_manifest = cmd->add_option("--corpus", manifest, "corpus manifest to predict");
    o_split = cmd->add_option("--split", split, "manifest split filter");
    o_out = cmd->add_option("--out", out, "output directory");
    o_format = cmd->add_option("--format", format, "pgm or png (16-bit)");
    o_threads = cmd->add_option("--threads", threads, "worker threads");
  }

  void run() const {
    Config cfg = config.empty() ? Config() : Config::from_file(config);
    if (*o_ckpt) cfg.set("predict.checkpoint", checkpoint);
    if (*o_manifest) cfg.set("predict.manifest", manifest);
    if (*o_split) cfg.set("predict.split", split);
    if (*o_out) cfg.set("out", out);
    if (*o_format) cfg.set("predict.format", format);
    if (*o_threads) cfg.set("threads", std::to_string(threads));

    pipeline::PredictArgs args;
    args.spec = graph::NetworkSpec::from_config(cfg);
    args.checkpoint = cfg.get_str("predict.checkpoint");
    args.images = images;
    args.manifest = cfg.get_str("predict.manifest", "");
    args.split = cfg.get_str("predict.split", "");
    args.out_dir = cfg.get_str("out");
    args.format = cfg.get_str("predict.format", "pgm");
    args.threads = static_cast<int>(cfg.get_int("threads", hardware_threads()));

    const auto written = pipeline::run_predict(args);
    std::cout << json{{"out_dir", args.out_dir},
                      {"written", written.size()},
                      {"format", args.format}}
                     .dump()
              << "\n";
  }
};

struct EvalCli {
  std::string config, pred, gt, manifest, split, report_dir;
  long thresholds = 0;
  double tolerance = 0.0;
  bool no_nms = false;
  int threads = 0;

  CLI::Option *o_pred, *o_gt, *o_manifest, *o_split, *o_report, *o_thresholds, *o_tolerance,
      *o_no_nms, *o_threads;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "key=value configuration file");
    o_pred = cmd->add_option("--pred", pred, "prediction directory");
    o_gt = cmd->add_option("--gt", gt, "ground-truth directory (<stem>_a<k>.png)");
    o_manifest = cmd->add_option("--corpus", manifest, "corpus manifest as ground truth");
    o_split = cmd->add_option("--split", split, "manifest split filter");
    o_report = cmd->add_option("--out", report_dir, "report directory (CSV + SVG)");
    o_thresholds = cmd->add_option("--thresholds", thresholds, "binarization thresholds");
    o_tolerance = cmd->add_option("--tolerance", tolerance,
                                  "matching tolerance in px (default 0.0075 x diagonal)");
    o_no_nms = cmd->add_flag("--no-nms", no_nms, "predictions are already thinned");
    o_threads = cmd->add_option("--threads", threads, "worker threads");
  }

  void run() const {
    Config cfg = config.empty() ? Config() : Config::from_file(config);
    if (*o_pred) cfg.set("eval.pred_dir", pred);
    if (*o_gt) cfg.set("eval.gt_dir", gt);
    if (*o_manifest) cfg.set("eval.manifest", manifest);
    if (*o_split) cfg.set("eval.split", split);
    if (*o_report) cfg.set("eval.report_dir", report_dir);
    if (*o_thresholds) cfg.set("eval.thresholds", std::to_string(thresholds));
    if (*o_tolerance) cfg.set("eval.tolerance_px", std::to_string(tolerance));
    if (*o_no_nms) cfg.set("eval.nms", "false");
    if (*o_threads) cfg.set("threads", std::to_string(threads));

    pipeline::EvalArgs args;
    args.pred_dir = cfg.get_str("eval.pred_dir");
    args.gt_dir = cfg.get_str("eval.gt_dir", "");
    args.manifest = cfg.get_str("eval.manifest", "");
    args.split = cfg.get_str("eval.split", "");
    args.report_dir = cfg.get_str("eval.report_dir", "");
    args.bench.thresholds = static_cast<int>(cfg.get_int("eval.thresholds", 99));
    args.bench.tolerance_px = cfg.get_double("eval.tolerance_px", 0.0);
    args.bench.apply_nms = cfg.get_bool("eval.nms", true);
    args.bench.threads = static_cast<int>(cfg.get_int("threads", hardware_threads()));

    const auto result = pipeline::run_eval(args);
    json out{{"ods", result.summary.ods},
             {"ods_threshold", result.summary.ods_threshold},
             {"ois", result.summary.ois},
             {"ap", result.summary.ap},
             {"images", result.images}};
    if (!args.report_dir.empty()) out["report"] = args.report_dir;
    std::cout << out.dump() << "\n";
  }
};

struct ReportCli {
  std::string in_dir, out_dir;

  void attach(CLI::App* cmd) {
    cmd->add_option("--in", in_dir, "eval output directory (pr.csv + summary.csv)")
        ->required();
    cmd->add_option("--out", out_dir, "target directory (defaults to --in)");
  }

  void run() const {
    const auto summary = bench::load_report(in_dir);
    bench::export_report(summary, out_dir.empty() ? in_dir : out_dir);
    std::cout << json{{"ods", summary.ods},
                      {"ods_threshold", summary.ods_threshold},
                      {"ois", summary.ois},
                      {"ap", summary.ap},
                      {"report", out_dir.empty() ? in_dir : out_dir}}
                     .dump()
              << "\n";
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RefineContourNet desk-scale toolkit: forge, train, predict, eval, report"};
  app.require_subcommand(1);

  ForgeCli forge_cli;
  TrainCli train_cli;
  PredictCli predict_cli;
  EvalCli eval_cli;
  ReportCli report_cli;

  auto* c_forge = app.add_subcommand("forge", "Generate or convert a training corpus");
  forge_cli.attach(c_forge);
  c_forge->callback([&] { forge_cli.run(); });

  auto* c_train = app.add_subcommand("train", "Train a model from a plan");
  train_cli.attach(c_train);
  c_train->callback([&] { train_cli.run(); });

  auto* c_predict = app.add_subcommand("predict", "Write 16-bit probability maps");
  predict_cli.attach(c_predict);
  c_predict->callback([&] { predict_cli.run(); });

  auto* c_eval = app.add_subcommand("eval", "Benchmark predictions (ODS/OIS/AP)");
  eval_cli.attach(c_eval);
  c_eval->callback([&] { eval_cli.run(); });

  auto* c_report = app.add_subcommand("report", "Re-render CSV/SVG from an eval directory");
  report_cli.attach(c_report);
  c_report->callback([&] { report_cli.run(); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("config", e.what());
    return 2;
  } catch (const ConfigError& e) {
    print_error("config", e.what());
    return 2;
  } catch (const IoError& e) {
    print_error("io", e.what());
    return 1;
  } catch (const Error& e) {
    print_error("runtime", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("runtime", e.what());
    return 1;
  }
  return 0;
}
