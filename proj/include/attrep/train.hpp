#pragma once

#include <optional>
#include <string>

#include "attrep/augment.hpp"
#include "attrep/contrastive.hpp"
#include "attrep/data.hpp"
#include "attrep/losses.hpp"
#include "attrep/model.hpp"
#include "attrep/teacher.hpp"

namespace attrep {

// Linear warmup followed by cosine decay to zero.
struct ScheduleConfig {
  double base_lr = 0.005;
  double warmup_start_lr = 1e-6;
  int warmup_epochs = 3;
  int total_epochs = 100;
  int steps_per_epoch = 1;

  long warmup_steps() const { return static_cast<long>(warmup_epochs) * steps_per_epoch; }
  long total_steps() const { return static_cast<long>(total_epochs) * steps_per_epoch; }
  void validate() const;
};

// Learning rate at an optimizer step in [0, total_steps].
double lr_at(long step, const ScheduleConfig& sched);

// Per-batch loss components (unweighted); total carries the weights:
// total = ce + alpha*rce + beta*cr + gamma*mt + aux_weight*aux.
// A component whose weight is zero is skipped and reported as exactly 0.
struct LossBreakdown {
  double ce = 0.0, rce = 0.0, cr = 0.0, mt = 0.0, aux = 0.0, total = 0.0;
};

struct TrainOptions {
  std::string optimizer = "rmsprop";  // "rmsprop" | "sgd"
  double weight_decay = 1e-5;         // conv/linear weights only
  double momentum = 0.9;
  double rms_alpha = 0.9;
  double rms_eps = 1e-8;
  int batch_size = 64;
  double mix_prob = 0.5;
  double mixup_alpha = 0.5;
  double cutmix_alpha = 1.0;
  std::string cr_space = "prob";  // "prob" | "feature" (projector head)
  bool cr_normalize = true;
  bool aux_in_cr = false;  // aux head probabilities join the CR batch
  bool aux_in_mt = false;  // consistency also applied to the aux head
  int mt_delay_epochs = 0;
  int eval_every = 10;  // epochs between evaluations; 0 = final only
  bool eval_fusion = true;
  bool eval_tencrop = false;
  double tencrop_fraction = 0.875;  // crop side as a fraction of image side
  void validate() const;
};

struct TotalLossResult {
  LossBreakdown breakdown;
  Eigen::MatrixXd dlogits;      // 2N x C, d(total)/d(student logits)
  Eigen::MatrixXd daux_logits;  // 2N x C
  Eigen::MatrixXd dproj;        // 2N x F in feature-space CR mode, else empty
  double mean_positive_size = 0.0;
  int skipped_anchors = 0;
};

// Assembles the full objective over a two-view batch. student/teacher rows
// are the 2N views (first all a-views, then all b-views); mixed_labels holds
// the N shared soft labels. teacher may be null when gamma is 0 or the
// consistency term is delayed.
TotalLossResult total_loss(const BatchOutput& student, const BatchOutput* teacher,
                           const std::vector<Vec>& mixed_labels, const LossConfig& cfg,
                           const TrainOptions& opts);

struct EvalMetrics {
  double student_top1 = 0.0;  // percent
  double teacher_top1 = 0.0;
};

// Top-1 accuracy of the student and teacher parameter sets under an identical
// pipeline (normalization only; optional head fusion; optional TenCrop).
EvalMetrics evaluate(const Network& net, const Eigen::VectorXd& params,
                     const Eigen::VectorXd& teacher_params, const Dataset& ds,
                     const AugPolicy& policy, bool use_fusion, double fusion_weight,
                     bool use_tencrop, double tencrop_fraction);

// Thrown when a training step produces a non-finite loss. Carries enough to
// replay the offending batch.
class TrainDivergence : public std::runtime_error {
 public:
  TrainDivergence(const std::string& what, int epoch, long step, std::string batch_rng_state)
      : std::runtime_error(what), epoch(epoch), step(step), batch_rng_state(std::move(batch_rng_state)) {}
  int epoch;
  long step;
  std::string batch_rng_state;
};

struct EpochStats {
  LossBreakdown mean;
  double mean_positive_size = 0.0;
  double last_lr = 0.0;
};

// Owns the full optimization state: student parameters, the EMA teacher,
// optimizer buffers, schedule position and the rng stream.
class Trainer {
 public:
  Trainer(const ModelSpec& model, const LossConfig& loss, const ScheduleConfig& schedule,
          const AugPolicy& policy, const TrainOptions& options, std::uint64_t seed);

  // One optimizer step followed by one EMA update.
  LossBreakdown train_step(const TwoViewBatch& batch);

  // Shuffles, builds two-view batches and steps through one epoch.
  EpochStats run_epoch(const Dataset& train);

  EvalMetrics evaluate(const Dataset& ds) const;
  EvalMetrics evaluate(const Dataset& ds, bool use_fusion, bool use_tencrop) const;

  const Network& net() const { return net_; }
  const Eigen::VectorXd& params() const { return params_; }
  const TeacherState& teacher() const { return teacher_; }
  const ScheduleConfig& schedule() const { return schedule_; }
  long step() const { return step_; }
  int epoch() const { return epoch_; }
  double last_mean_positive_size() const { return last_mean_positive_size_; }

  // Checkpoint plumbing.
  struct Snapshot {
    Eigen::VectorXd params, teacher_params, square_avg, momentum_buf;
    long teacher_step_count = 0;
    long step = 0;
    int epoch = 0;
    std::string rng_state;
  };
  Snapshot snapshot() const;
  void restore(const Snapshot& snap);

 private:
  Network net_;
  LossConfig loss_;
  ScheduleConfig schedule_;
  AugPolicy policy_;
  TrainOptions options_;
  Eigen::VectorXd params_;
  TeacherState teacher_;
  Eigen::VectorXd square_avg_, momentum_buf_;
  Eigen::ArrayXd decay_weights_;
  long step_ = 0;
  int epoch_ = 0;
  double last_mean_positive_size_ = 0.0;
  Rng rng_;
  std::string last_batch_rng_state_;
};

}  // namespace attrep
