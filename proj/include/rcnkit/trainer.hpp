#pragma once

#include <string>
#include <vector>

#include "rcnkit/augment.hpp"
#include "rcnkit/config.hpp"
#include "rcnkit/forge.hpp"
#include "rcnkit/loss.hpp"
#include "rcnkit/rcn.hpp"
#include "rcnkit/rng.hpp"

namespace rcnkit::train {

// One training stage: sample `images_per_epoch` images per epoch with
// replacement, augment, descend.
struct StageConfig {
  std::string corpus;  // manifest path; informational when the corpus is in memory
  int epochs = 10;
  int images_per_epoch = 64;
  float lr = 0.02f;
  float lr_decay = 1.0f;  // multiplicative per epoch
  float momentum = 0.9f;
  float weight_decay = 1e-4f;
  float clip_norm = 10.0f;  // global gradient-norm cap, 0 disables
};

struct TrainPlan {
  std::vector<StageConfig> stages;
  std::string variant = "custom";  // custom | rcn-voc | rcn-coco | rcn | rcn-voc-1
  AugmentConfig augment;
  LossConfig loss;
  std::string annotator_mode = "all";  // all | single
  int annotator_id = 0;                // used by mode "single"
};

// An image with every annotator label that exists for it.
struct LoadedImage {
  Tensor image;  // 1x3xHxW in [0,1]
  std::vector<LabelMap> labels;
};

struct Corpus {
  std::vector<Sample> samples;
};

// Reads the images of one split; label order follows the manifest.
std::vector<LoadedImage> load_images(const forge::CorpusManifest& manifest,
                                     const std::string& base_dir, const std::string& split);

// mode "all": one Sample per (image, annotator) pair. mode "single":
// exactly annotator `annotator_id` per image; missing → error.
Corpus expand_annotators(const std::vector<LoadedImage>& images, const std::string& mode,
                         int annotator_id);

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  double lr = 0.0;
  double wall_seconds = 0.0;
};

// Runs one stage. The checkpoint (when a path is given) is rewritten at
// every epoch end, so the file always holds the last completed epoch; a
// non-finite loss aborts with diagnostics and leaves it in place.
std::vector<EpochLog> run_stage(const StageConfig& stage, graph::RcnModel& model,
                                const Corpus& corpus, const AugmentConfig& aug,
                                const LossConfig& loss_cfg, Rng& rng,
                                const std::string& checkpoint_path = "", int first_epoch = 1);

// CSV with header epoch,mean_loss,lr,wall_time.
void save_train_log(const std::string& path, const std::vector<EpochLog>& logs);

// Reads plan.* keys into a TrainPlan: plan.variant, plan.annotator_mode,
// plan.annotator_id, plan.augment.*, plan.loss.beta, and one
// plan.stage<N>.{corpus,epochs,images_per_epoch,lr,lr_decay,momentum,
// weight_decay,clip_norm} group per stage, N counted from 0. The variant
// "rcn-voc-1" forces single-annotator mode; "rcn" requires at least two
// stages (the pre-train corpus and the main corpus).
TrainPlan plan_from_config(const Config& cfg);

}  // namespace rcnkit::train
