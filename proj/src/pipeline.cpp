#include "rcnkit/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <utility>

#include "rcnkit/checkpoint.hpp"
#include "rcnkit/errors.hpp"
#include "rcnkit/image_io.hpp"
#include "rcnkit/log.hpp"
#include "rcnkit/parallel.hpp"
#include "rcnkit/rcn.hpp"
#include "rcnkit/report.hpp"

namespace rcnkit::pipeline {
namespace {

namespace fs = std::filesystem;

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

// Sorted PNG stems of one directory.
std::vector<std::string> png_stems(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::string> stems;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png")
      stems.push_back(e.path().stem().string());
  std::sort(stems.begin(), stems.end());
  return stems;
}

ForgeResult forge_from_masks(const ForgeArgs& args) {
  if (args.classes.empty())
    throw ConfigError("forge: mask conversion needs a non-empty class list");
  const fs::path root(args.masks_dir);
  const fs::path out(args.out_dir);
  const auto stems = png_stems(root / "masks");
  if (stems.empty()) throw IoError("no mask PNGs under " + (root / "masks").string());
  fs::create_directories(out / "labels");

  forge::CorpusManifest manifest;
  std::int64_t positives = 0, pixels = 0;
  int empty_labels = 0;
  for (const auto& stem : stems) {
    const ImageU8 raster = load_png((root / "masks" / (stem + ".png")).string());
    forge::SegmentationMask mask = forge::SegmentationMask::zeros(raster.h, raster.w);
    for (int y = 0; y < raster.h; ++y)
      for (int x = 0; x < raster.w; ++x) mask.set(y, x, raster.at(y, x, 0));
    const LabelMap label = forge::mask_to_contours(mask, args.classes);
    save_label_png((out / "labels" / (stem + ".png")).string(), label);
    positives += label.positive_count();
    pixels += static_cast<std::int64_t>(label.h) * label.w;
    empty_labels += label.positive_count() == 0;

    forge::ManifestEntry entry;
    const fs::path image = root / "images" / (stem + ".png");
    if (!fs::exists(image))
      throw IoError("mask " + stem + ".png has no matching image " + image.string());
    std::error_code ec;
    const fs::path rel = fs::relative(image, out, ec);
    entry.image = ec ? fs::absolute(image).string() : rel.string();
    entry.labels = {"labels/" + stem + ".png"};
    entry.split = "train";
    manifest.entries.push_back(std::move(entry));
  }
  if (empty_labels > 0)
    log_info("warning: " + std::to_string(empty_labels) + " of " +
             std::to_string(stems.size()) + " masks produced empty contour labels");

  ForgeResult result;
  result.manifest_path = (out / "manifest.tsv").string();
  manifest.save(result.manifest_path);
  result.images = static_cast<int>(stems.size());
  result.positive_rate = pixels > 0 ? static_cast<double>(positives) / pixels : 0.0;
  return result;
}

}  // namespace

ForgeResult run_forge(const ForgeArgs& args) {
  if (args.out_dir.empty()) throw ConfigError("forge: output directory required");
  if (!args.synthetic) return forge_from_masks(args);

  const forge::SynthCorpus corpus = forge::synth_corpus(args.synth, args.out_dir);
  ForgeResult result;
  result.manifest_path = corpus.manifest_path;
  result.images = static_cast<int>(corpus.manifest.entries.size());
  std::int64_t positives = 0, pixels = 0;
  for (const auto& entry : corpus.manifest.entries) {
    const fs::path base = fs::path(corpus.manifest_path).parent_path();
    for (const auto& rel : entry.labels) {
      const LabelMap label = load_label_png((base / rel).string());
      positives += label.positive_count();
      pixels += static_cast<std::int64_t>(label.h) * label.w;
    }
  }
  result.positive_rate = pixels > 0 ? static_cast<double>(positives) / pixels : 0.0;
  return result;
}

TrainResult run_train(const TrainArgs& args) {
  if (args.plan.stages.empty()) throw ConfigError("train: plan has no stages");
  graph::RcnModel model =
      args.checkpoint_in.empty()
          ? graph::RcnModel(args.spec, args.seed)
          : graph::RcnModel(args.spec, load_checkpoint(args.checkpoint_in));

  Rng rng = Rng(args.seed).split(0x747261696eULL);  // training stream
  TrainResult result;
  int first_epoch = 1;
  for (std::size_t s = 0; s < args.plan.stages.size(); ++s) {
    const train::StageConfig& stage = args.plan.stages[s];
    if (stage.corpus.empty())
      throw ConfigError("train: stage " + std::to_string(s) + " names no corpus manifest");
    const auto manifest = forge::CorpusManifest::load(stage.corpus);
    const std::string base = fs::path(stage.corpus).parent_path().string();
    const auto images = train::load_images(manifest, base, args.split);
    if (images.empty())
      throw ConfigError("train: stage " + std::to_string(s) + " has no images for split '" +
                        args.split + "' in " + stage.corpus);
    const train::Corpus corpus =
        train::expand_annotators(images, args.plan.annotator_mode, args.plan.annotator_id);
    log_info("stage " + std::to_string(s + 1) + "/" +
             std::to_string(args.plan.stages.size()) + ": " +
             std::to_string(corpus.samples.size()) + " samples from " + stage.corpus);
    auto logs = train::run_stage(stage, model, corpus, args.plan.augment, args.plan.loss, rng,
                                 args.checkpoint_out, first_epoch);
    first_epoch += static_cast<int>(logs.size());
    result.logs.insert(result.logs.end(), logs.begin(), logs.end());
  }
  if (!args.checkpoint_out.empty()) save_checkpoint(model.params(), args.checkpoint_out);
  if (!args.log_csv.empty()) train::save_train_log(args.log_csv, result.logs);
  return result;
}

std::vector<std::string> run_predict(const PredictArgs& args) {
  if (args.out_dir.empty()) throw ConfigError("predict: output directory required");
  if (args.format != "pgm" && args.format != "png")
    throw ConfigError("predict: format must be pgm or png, got " + args.format);
  if (args.checkpoint.empty()) throw ConfigError("predict: checkpoint required");

  std::vector<std::string> inputs = args.images;
  if (!args.manifest.empty()) {
    const auto manifest = forge::CorpusManifest::load(args.manifest);
    const fs::path base = fs::path(args.manifest).parent_path();
    for (const auto& entry : manifest.entries)
      if (args.split.empty() || entry.split == args.split)
        inputs.push_back((base / entry.image).string());
  }
  if (inputs.empty()) throw ConfigError("predict: no input images");

  const graph::RcnModel model(args.spec, load_checkpoint(args.checkpoint));
  fs::create_directories(args.out_dir);
  std::vector<std::string> written(inputs.size());
  parallel_for(inputs.size(), args.threads, [&](std::size_t i) {
    const ImageU8 image = load_png(inputs[i]);
    const ContourPrediction pred = model.predict(image);
    const std::string path =
        (fs::path(args.out_dir) / (stem_of(inputs[i]) + "." + args.format)).string();
    save_prediction(path, pred);
    written[i] = path;
  });
  return written;
}

EvalResult run_eval(const EvalArgs& args) {
  if (args.pred_dir.empty()) throw ConfigError("eval: prediction directory required");
  if (args.gt_dir.empty() == args.manifest.empty())
    throw ConfigError("eval: exactly one ground-truth source (gt dir or manifest) required");

  std::vector<std::string> stems;
  std::vector<std::vector<std::string>> gt_paths;
  if (!args.manifest.empty()) {
    const auto manifest = forge::CorpusManifest::load(args.manifest);
    const fs::path base = fs::path(args.manifest).parent_path();
    for (const auto& entry : manifest.entries) {
      if (!args.split.empty() && entry.split != args.split) continue;
      stems.push_back(stem_of(entry.image));
      std::vector<std::string> paths;
      for (const auto& rel : entry.labels) paths.push_back((base / rel).string());
      gt_paths.push_back(std::move(paths));
    }
  } else {
    const fs::path gt_root(args.gt_dir);
    for (const auto& stem : [&] {
           std::vector<std::string> out;
           for (const auto& e : fs::directory_iterator(args.pred_dir))
             if (e.is_regular_file() &&
                 (e.path().extension() == ".pgm" || e.path().extension() == ".png"))
               out.push_back(e.path().stem().string());
           std::sort(out.begin(), out.end());
           return out;
         }()) {
      std::vector<std::string> paths;
      for (int a = 0;; ++a) {
        const fs::path p = gt_root / (stem + "_a" + std::to_string(a) + ".png");
        if (!fs::exists(p)) break;
        paths.push_back(p.string());
      }
      if (paths.empty() && fs::exists(gt_root / (stem + ".png")))
        paths.push_back((gt_root / (stem + ".png")).string());
      if (paths.empty())
        throw IoError("eval: no ground truth for '" + stem + "' under " + gt_root.string());
      stems.push_back(stem);
      gt_paths.push_back(std::move(paths));
    }
  }
  if (stems.empty()) throw ConfigError("eval: nothing to evaluate");

  std::vector<ContourPrediction> preds(stems.size());
  std::vector<GroundTruthSet> gts(stems.size());
  for (std::size_t i = 0; i < stems.size(); ++i) {
    const fs::path pgm = fs::path(args.pred_dir) / (stems[i] + ".pgm");
    const fs::path png = fs::path(args.pred_dir) / (stems[i] + ".png");
    if (fs::exists(pgm))
      preds[i] = load_prediction(pgm.string());
    else if (fs::exists(png))
      preds[i] = load_prediction(png.string());
    else
      throw IoError("eval: no prediction for '" + stems[i] + "' under " + args.pred_dir);
    for (const auto& path : gt_paths[i]) gts[i].annotators.push_back(load_label_png(path));
    for (const auto& m : gts[i].annotators)
      if (m.h != preds[i].h || m.w != preds[i].w)
        throw ShapeError("eval: extent mismatch for '" + stems[i] + "': prediction " +
                         std::to_string(preds[i].h) + "x" + std::to_string(preds[i].w) +
                         " vs ground truth " + std::to_string(m.h) + "x" +
                         std::to_string(m.w));
  }

  EvalResult result;
  result.images = static_cast<int>(stems.size());
  result.summary = bench::benchmark(preds, gts, args.bench);
  if (!args.report_dir.empty()) bench::export_report(result.summary, args.report_dir);
  return result;
}

}  // namespace rcnkit::pipeline
