#include "rcnkit/trainer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "rcnkit/checkpoint.hpp"
#include "rcnkit/errors.hpp"
#include "rcnkit/image_io.hpp"
#include "rcnkit/log.hpp"

namespace rcnkit::train {

std::vector<LoadedImage> load_images(const forge::CorpusManifest& manifest,
                                     const std::string& base_dir, const std::string& split) {
  namespace fs = std::filesystem;
  std::vector<LoadedImage> out;
  for (const auto& entry : manifest.entries) {
    if (!split.empty() && entry.split != split) continue;
    LoadedImage img;
    img.image = image_to_tensor(load_png((fs::path(base_dir) / entry.image).string()));
    for (std::size_t a = 0; a < entry.labels.size(); ++a) {
      LabelMap label = load_label_png((fs::path(base_dir) / entry.labels[a]).string());
      if (label.h != img.image.shape().h || label.w != img.image.shape().w)
        throw ShapeError("corpus: label " + entry.labels[a] + " extent does not match " +
                         entry.image);
      label.source = LabelSource::annotator;
      label.annotator_id = static_cast<int>(a);
      img.labels.push_back(std::move(label));
    }
    out.push_back(std::move(img));
  }
  return out;
}

Corpus expand_annotators(const std::vector<LoadedImage>& images, const std::string& mode,
                         int annotator_id) {
  Corpus corpus;
  if (mode == "all") {
    for (const auto& img : images) {
      if (img.labels.empty()) throw Error("expand_annotators: image without labels");
      for (const auto& label : img.labels) {
        Sample s;
        s.image = img.image;
        s.label = label;
        s.annotator_id = label.annotator_id;
        corpus.samples.push_back(std::move(s));
      }
    }
  } else if (mode == "single") {
    for (const auto& img : images) {
      if (annotator_id < 0 || annotator_id >= static_cast<int>(img.labels.size()))
        throw Error("expand_annotators: requested annotator " + std::to_string(annotator_id) +
                    " missing (image has " + std::to_string(img.labels.size()) + " labels)");
      Sample s;
      s.image = img.image;
      s.label = img.labels[annotator_id];
      s.annotator_id = annotator_id;
      corpus.samples.push_back(std::move(s));
    }
  } else {
    throw ConfigError("expand_annotators: unknown mode '" + mode + "'");
  }
  return corpus;
}

std::vector<EpochLog> run_stage(const StageConfig& stage, graph::RcnModel& model,
                                const Corpus& corpus, const AugmentConfig& aug,
                                const LossConfig& loss_cfg, Rng& rng,
                                const std::string& checkpoint_path, int first_epoch) {
  if (corpus.samples.empty()) throw Error("run_stage: empty corpus");
  if (stage.epochs < 0 || stage.images_per_epoch < 1)
    throw ConfigError("run_stage: epochs must be >= 0 and images_per_epoch >= 1");

  std::vector<EpochLog> logs;
  double lr = stage.lr;
  const int n = static_cast<int>(corpus.samples.size());
  for (int epoch = 0; epoch < stage.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    double loss_sum = 0.0;
    for (int step = 0; step < stage.images_per_epoch; ++step) {
      const int idx = rng.uniform_int(n);
      Sample s = augment(corpus.samples[idx], aug, rng);

      Tape tape;
      Tensor x = model.normalize(s.image);
      Tensor pred = model.forward_upsampled(x, &tape);
      Tensor label = label_to_tensor(s.label);
      Tensor loss = weighted_logistic_loss(pred, label, loss_cfg, &tape);
      const float value = loss.scalar();
      if (!std::isfinite(value))
        throw NumericError("run_stage: non-finite loss at epoch " +
                           std::to_string(first_epoch + epoch) + ", step " +
                           std::to_string(step + 1) + " (last checkpoint retained)");
      loss_sum += value;
      tape.backward(loss);
      clip_gradients(model.params(), stage.clip_norm);
      sgd_step(model.params(), static_cast<float>(lr), stage.momentum, stage.weight_decay);
    }
    const auto t1 = std::chrono::steady_clock::now();

    EpochLog log;
    log.epoch = first_epoch + epoch;
    log.mean_loss = loss_sum / stage.images_per_epoch;
    log.lr = lr;
    log.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    logs.push_back(log);
    log_info("epoch " + std::to_string(log.epoch) + ": mean_loss " +
             std::to_string(log.mean_loss) + ", lr " + std::to_string(log.lr));

    if (!checkpoint_path.empty()) save_checkpoint(model.params(), checkpoint_path);
    lr *= stage.lr_decay;
  }
  return logs;
}

void save_train_log(const std::string& path, const std::vector<EpochLog>& logs) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("train log: cannot open '" + path + "' for writing");
  f << "epoch,mean_loss,lr,wall_time\n";
  f.precision(17);
  for (const auto& log : logs)
    f << log.epoch << ',' << log.mean_loss << ',' << log.lr << ',' << log.wall_seconds << '\n';
  if (!f) throw IoError("train log: write failed for '" + path + "'");
}

TrainPlan plan_from_config(const Config& cfg) {
  TrainPlan plan;
  plan.variant = cfg.get_str("plan.variant", "custom");
  const bool known = plan.variant == "custom" || plan.variant == "rcn" ||
                     plan.variant == "rcn-voc" || plan.variant == "rcn-coco" ||
                     plan.variant == "rcn-voc-1";
  if (!known) throw ConfigError("plan.variant: unknown variant '" + plan.variant + "'");

  plan.annotator_mode = cfg.get_str("plan.annotator_mode", "all");
  plan.annotator_id = static_cast<int>(cfg.get_int("plan.annotator_id", 0));
  if (plan.variant == "rcn-voc-1") plan.annotator_mode = "single";

  plan.augment.crop_h = static_cast<int>(cfg.get_int("plan.augment.crop_h", 64));
  plan.augment.crop_w = static_cast<int>(cfg.get_int("plan.augment.crop_w", 64));
  plan.augment.vflip_prob =
      static_cast<float>(cfg.get_double("plan.augment.vflip_prob", 0.5));
  plan.augment.horizontal_flip = cfg.get_bool("plan.augment.hflip", false);
  plan.augment.scale_lo = static_cast<float>(cfg.get_double("plan.augment.scale_lo", 0.7));
  plan.augment.scale_hi = static_cast<float>(cfg.get_double("plan.augment.scale_hi", 1.3));
  plan.loss.beta = static_cast<float>(cfg.get_double("plan.loss.beta", 10.0));

  for (int n = 0;; ++n) {
    const std::string prefix = "plan.stage" + std::to_string(n) + ".";
    if (!cfg.has(prefix + "corpus")) break;
    StageConfig stage;
    stage.corpus = cfg.get_str(prefix + "corpus");
    stage.epochs = static_cast<int>(cfg.get_int(prefix + "epochs", stage.epochs));
    stage.images_per_epoch =
        static_cast<int>(cfg.get_int(prefix + "images_per_epoch", stage.images_per_epoch));
    stage.lr = static_cast<float>(cfg.get_double(prefix + "lr", stage.lr));
    stage.lr_decay = static_cast<float>(cfg.get_double(prefix + "lr_decay", stage.lr_decay));
    stage.momentum = static_cast<float>(cfg.get_double(prefix + "momentum", stage.momentum));
    stage.weight_decay =
        static_cast<float>(cfg.get_double(prefix + "weight_decay", stage.weight_decay));
    stage.clip_norm = static_cast<float>(cfg.get_double(prefix + "clip_norm", stage.clip_norm));
    if (stage.epochs < 1 || stage.images_per_epoch < 1)
      throw ConfigError(prefix + "epochs/images_per_epoch must be >= 1");
    plan.stages.push_back(std::move(stage));
  }
  if (plan.stages.empty())
    throw ConfigError("plan: no stages configured (plan.stage0.corpus missing)");
  if (plan.variant == "rcn" && plan.stages.size() < 2)
    throw ConfigError("plan.variant rcn chains a pre-train and a main stage; configure "
                      "plan.stage0 and plan.stage1");
  return plan;
}

}  // namespace rcnkit::train
