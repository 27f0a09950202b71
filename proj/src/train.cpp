#include "attrep/train.hpp"

#include <cmath>
#include <stdexcept>

namespace attrep {

void ScheduleConfig::validate() const {
  if (base_lr <= 0.0 || warmup_start_lr <= 0.0)
    throw std::invalid_argument("ScheduleConfig: learning rates must be > 0");
  if (warmup_epochs < 0 || warmup_epochs >= total_epochs)
    throw std::invalid_argument("ScheduleConfig: need 0 <= warmup_epochs < total_epochs");
  if (steps_per_epoch < 1) throw std::invalid_argument("ScheduleConfig: steps_per_epoch must be >= 1");
}

double lr_at(long step, const ScheduleConfig& sched) {
  sched.validate();
  if (step < 0 || step > sched.total_steps())
    throw std::invalid_argument("lr_at: step out of range");
  const long warmup = sched.warmup_steps();
  if (step < warmup) {
    const double t = static_cast<double>(step) / static_cast<double>(warmup);
    return sched.warmup_start_lr + (sched.base_lr - sched.warmup_start_lr) * t;
  }
  const double progress =
      static_cast<double>(step - warmup) / static_cast<double>(sched.total_steps() - warmup);
  return sched.base_lr * 0.5 * (1.0 + std::cos(M_PI * progress));
}

void TrainOptions::validate() const {
  if (optimizer != "rmsprop" && optimizer != "sgd")
    throw std::invalid_argument("TrainOptions: optimizer must be rmsprop or sgd");
  if (weight_decay < 0.0) throw std::invalid_argument("TrainOptions: weight_decay must be >= 0");
  if (momentum < 0.0 || momentum >= 1.0) throw std::invalid_argument("TrainOptions: momentum must be in [0, 1)");
  if (rms_alpha <= 0.0 || rms_alpha >= 1.0) throw std::invalid_argument("TrainOptions: rms_alpha must be in (0, 1)");
  if (rms_eps <= 0.0) throw std::invalid_argument("TrainOptions: rms_eps must be > 0");
  if (batch_size < 1) throw std::invalid_argument("TrainOptions: batch_size must be >= 1");
  if (mix_prob < 0.0 || mix_prob > 1.0) throw std::invalid_argument("TrainOptions: mix_prob must be in [0, 1]");
  if (mixup_alpha <= 0.0 || cutmix_alpha <= 0.0)
    throw std::invalid_argument("TrainOptions: mix alphas must be > 0");
  if (cr_space != "prob" && cr_space != "feature")
    throw std::invalid_argument("TrainOptions: cr_space must be prob or feature");
  if (mt_delay_epochs < 0) throw std::invalid_argument("TrainOptions: mt_delay_epochs must be >= 0");
  if (eval_every < 0) throw std::invalid_argument("TrainOptions: eval_every must be >= 0");
  if (tencrop_fraction <= 0.0 || tencrop_fraction > 1.0)
    throw std::invalid_argument("TrainOptions: tencrop_fraction must be in (0, 1]");
}

TotalLossResult total_loss(const BatchOutput& student, const BatchOutput* teacher,
                           const std::vector<Vec>& mixed_labels, const LossConfig& cfg,
                           const TrainOptions& opts) {
  cfg.validate();
  const int views = student.size();
  const int n = static_cast<int>(mixed_labels.size());
  if (views == 0 || views % 2 != 0) throw std::invalid_argument("total_loss: view count must be even");
  if (views != 2 * n) throw std::invalid_argument("total_loss: 2N views need N mixed labels");
  if (cfg.gamma > 0.0 && teacher != nullptr && teacher->size() != views)
    throw std::invalid_argument("total_loss: teacher outputs misaligned with student outputs");
  const int classes = static_cast<int>(student.logits.cols());
  const double inv_views = 1.0 / static_cast<double>(views);

  TotalLossResult result;
  result.dlogits = Eigen::MatrixXd::Zero(views, classes);
  result.daux_logits = Eigen::MatrixXd::Zero(views, classes);

  std::vector<Vec> probs(static_cast<std::size_t>(views));
  std::vector<Vec> aux_probs;
  const bool need_aux_probs = (cfg.aux_weight > 0.0 && opts.aux_in_cr && cfg.beta > 0.0) ||
                              (cfg.aux_weight > 0.0 && opts.aux_in_mt && cfg.gamma > 0.0 && teacher);
  if (need_aux_probs) aux_probs.resize(static_cast<std::size_t>(views));

  auto label_of = [&](int i) -> const Vec& {
    return mixed_labels[static_cast<std::size_t>(i % n)];
  };

  LossBreakdown& bd = result.breakdown;
  for (int i = 0; i < views; ++i) {
    const Vec& q = label_of(i);
    if (q.size() != classes) throw std::invalid_argument("total_loss: label length mismatch");
    const Vec p = softmax(student.logits.row(i).transpose());
    probs[static_cast<std::size_t>(i)] = p;

    bd.ce += cross_entropy(q, p) * inv_views;
    result.dlogits.row(i) += (inv_views * cross_entropy_grad_logits(q, p)).transpose();

    if (cfg.alpha > 0.0) {
      bd.rce += reverse_cross_entropy(q, p, cfg.rce_floor) * inv_views;
      result.dlogits.row(i) +=
          (cfg.alpha * inv_views * reverse_cross_entropy_grad_logits(q, p, cfg.rce_floor)).transpose();
    }

    if (cfg.gamma > 0.0 && teacher != nullptr) {
      const Vec tp = softmax(teacher->logits.row(i).transpose());
      bd.mt += mean_teacher_loss(p, tp) * inv_views;
      result.dlogits.row(i) +=
          (cfg.gamma * inv_views * mean_teacher_loss_grad_logits(p, tp)).transpose();
      if (opts.aux_in_mt && cfg.aux_weight > 0.0) {
        const Vec ap = softmax(student.aux_logits.row(i).transpose());
        const Vec tap = softmax(teacher->aux_logits.row(i).transpose());
        bd.mt += mean_teacher_loss(ap, tap) * inv_views;
        result.daux_logits.row(i) +=
            (cfg.gamma * inv_views * mean_teacher_loss_grad_logits(ap, tap)).transpose();
      }
    }

    if (cfg.aux_weight > 0.0) {
      const Vec ap = softmax(student.aux_logits.row(i).transpose());
      if (need_aux_probs) aux_probs[static_cast<std::size_t>(i)] = ap;
      bd.aux += cross_entropy(q, ap) * inv_views;
      result.daux_logits.row(i) +=
          (cfg.aux_weight * inv_views * cross_entropy_grad_logits(q, ap)).transpose();
    }
  }

  if (cfg.beta > 0.0 && views >= 2) {
    std::vector<Vec> labels2n(static_cast<std::size_t>(views));
    for (int i = 0; i < views; ++i) labels2n[static_cast<std::size_t>(i)] = label_of(i);
    const PositiveSets sets = build_positive_sets(labels2n, cfg.delta);
    result.mean_positive_size = sets.mean_size();
    result.skipped_anchors = sets.skipped_count();

    const bool feature_space = opts.cr_space == "feature";
    if (feature_space) {
      if (student.proj.size() == 0)
        throw std::invalid_argument("total_loss: feature-space CR needs a projector head");
      std::vector<Vec> feats(static_cast<std::size_t>(views));
      for (int i = 0; i < views; ++i) feats[static_cast<std::size_t>(i)] = student.proj.row(i).transpose();
      const CrGradResult cr = contrastive_regularization_with_grad(feats, sets, cfg.tau, opts.cr_normalize);
      bd.cr = cr.value;
      result.dproj = Eigen::MatrixXd::Zero(views, student.proj.cols());
      for (int i = 0; i < views; ++i)
        result.dproj.row(i) = (cfg.beta * cr.grad_inputs[static_cast<std::size_t>(i)]).transpose();
    } else {
      // CR over probability vectors; optionally the aux head joins with its
      // own probability vectors appended as extra anchors.
      std::vector<Vec> inputs = probs;
      PositiveSets cr_sets = sets;
      if (opts.aux_in_cr && cfg.aux_weight > 0.0) {
        std::vector<Vec> big_labels = labels2n;
        big_labels.insert(big_labels.end(), labels2n.begin(), labels2n.end());
        inputs.insert(inputs.end(), aux_probs.begin(), aux_probs.end());
        cr_sets = build_positive_sets(big_labels, cfg.delta);
      }
      const CrGradResult cr = contrastive_regularization_with_grad(inputs, cr_sets, cfg.tau, opts.cr_normalize);
      bd.cr = cr.value;
      for (int i = 0; i < views; ++i) {
        result.dlogits.row(i) +=
            (cfg.beta * softmax_backward(probs[static_cast<std::size_t>(i)],
                                         cr.grad_inputs[static_cast<std::size_t>(i)]))
                .transpose();
      }
      if (opts.aux_in_cr && cfg.aux_weight > 0.0) {
        for (int i = 0; i < views; ++i) {
          result.daux_logits.row(i) +=
              (cfg.beta * softmax_backward(aux_probs[static_cast<std::size_t>(i)],
                                           cr.grad_inputs[static_cast<std::size_t>(views + i)]))
                  .transpose();
        }
      }
    }
  }

  bd.total = bd.ce + cfg.alpha * bd.rce + cfg.beta * bd.cr + cfg.gamma * bd.mt +
             cfg.aux_weight * bd.aux;
  return result;
}

namespace {

Image eval_view(const Image& image, const AugPolicy& policy) {
  Image out = image;
  for (int c = 0; c < out.channels; ++c) {
    const double mean = policy.norm_mean[static_cast<std::size_t>(c)];
    const double inv_std = 1.0 / policy.norm_std[static_cast<std::size_t>(c)];
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x) out.at(c, y, x) = (out.at(c, y, x) - mean) * inv_std;
  }
  return out;
}

int argmax(const Vec& v) {
  Eigen::Index best = 0;
  v.maxCoeff(&best);
  return static_cast<int>(best);
}

double top1_for_params(const Network& net, const Eigen::VectorXd& params, const Dataset& ds,
                       const AugPolicy& policy, bool use_fusion, double fusion_weight,
                       bool use_tencrop, double tencrop_fraction) {
  const double w = use_fusion ? fusion_weight : 0.0;
  long correct = 0;
  if (use_tencrop) {
    const int crop = std::max(1 << (net.spec().num_stages() - 1),
                              static_cast<int>(std::floor(ds.height * tencrop_fraction)));
    for (int i = 0; i < ds.size(); ++i) {
      const Vec pred = tencrop_predict(net, params, eval_view(ds.image01(i), policy), crop, w);
      if (argmax(pred) == ds.labels[static_cast<std::size_t>(i)]) ++correct;
    }
  } else {
    const int chunk = 256;
    for (int start = 0; start < ds.size(); start += chunk) {
      const int count = std::min(chunk, ds.size() - start);
      std::vector<Image> views;
      views.reserve(static_cast<std::size_t>(count));
      for (int i = 0; i < count; ++i) views.push_back(eval_view(ds.image01(start + i), policy));
      const BatchOutput out = net.forward(params, views, /*training=*/false);
      for (int i = 0; i < count; ++i) {
        const Vec fused = aux_fusion(softmax(out.logits.row(i).transpose()),
                                     softmax(out.aux_logits.row(i).transpose()), w);
        if (argmax(fused) == ds.labels[static_cast<std::size_t>(start + i)]) ++correct;
      }
    }
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(ds.size());
}

}  // namespace

EvalMetrics evaluate(const Network& net, const Eigen::VectorXd& params,
                     const Eigen::VectorXd& teacher_params, const Dataset& ds,
                     const AugPolicy& policy, bool use_fusion, double fusion_weight,
                     bool use_tencrop, double tencrop_fraction) {
  if (ds.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
  EvalMetrics m;
  m.student_top1 = top1_for_params(net, params, ds, policy, use_fusion, fusion_weight, use_tencrop,
                                   tencrop_fraction);
  m.teacher_top1 = top1_for_params(net, teacher_params, ds, policy, use_fusion, fusion_weight,
                                   use_tencrop, tencrop_fraction);
  return m;
}

Trainer::Trainer(const ModelSpec& model, const LossConfig& loss, const ScheduleConfig& schedule,
                 const AugPolicy& policy, const TrainOptions& options, std::uint64_t seed)
    : net_(model),
      loss_(loss),
      schedule_(schedule),
      policy_(policy),
      options_(options),
      rng_(seed) {
  loss_.validate();
  schedule_.validate();
  policy_.validate();
  options_.validate();
  if (options_.cr_space == "feature" && !model.projector)
    throw std::invalid_argument("Trainer: feature-space CR needs ModelSpec.projector");
  params_ = net_.init_params(rng_);
  teacher_ = make_teacher(params_, loss_.eta);
  square_avg_ = Eigen::VectorXd::Zero(params_.size());
  momentum_buf_ = Eigen::VectorXd::Zero(params_.size());
  decay_weights_.resize(params_.size());
  const auto& mask = net_.decay_mask();
  for (Eigen::Index i = 0; i < params_.size(); ++i)
    decay_weights_[i] = mask[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
}

LossBreakdown Trainer::train_step(const TwoViewBatch& batch) {
  const int n = batch.size();
  if (n < 1) throw std::invalid_argument("train_step: empty batch");
  std::vector<Image> views;
  views.reserve(static_cast<std::size_t>(2 * n));
  for (const auto& v : batch.views_a) views.push_back(v);
  for (const auto& v : batch.views_b) views.push_back(v);

  Network::Tape tape;
  const BatchOutput student = net_.forward(params_, views, /*training=*/true, &rng_, &tape);
  std::optional<BatchOutput> teacher_out;
  if (loss_.gamma > 0.0 && epoch_ >= options_.mt_delay_epochs)
    teacher_out = net_.forward(teacher_.params, views, /*training=*/false);

  const TotalLossResult tl =
      total_loss(student, teacher_out ? &*teacher_out : nullptr, batch.mixed_labels, loss_, options_);
  last_mean_positive_size_ = tl.mean_positive_size;
  if (!std::isfinite(tl.breakdown.total))
    throw TrainDivergence("train_step: non-finite loss at step " + std::to_string(step_), epoch_,
                          step_, last_batch_rng_state_);

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
  net_.backward(params_, tape, tl.dlogits, tl.daux_logits, tl.dproj, grad);
  if (!grad.allFinite())
    throw TrainDivergence("train_step: non-finite gradient at step " + std::to_string(step_),
                          epoch_, step_, last_batch_rng_state_);
  if (options_.weight_decay > 0.0)
    grad.array() += options_.weight_decay * decay_weights_ * params_.array();

  const double lr = lr_at(std::min(step_, schedule_.total_steps()), schedule_);
  if (options_.optimizer == "rmsprop") {
    square_avg_ = options_.rms_alpha * square_avg_.array() +
                  (1.0 - options_.rms_alpha) * grad.array().square();
    momentum_buf_ = options_.momentum * momentum_buf_.array() +
                    grad.array() / (square_avg_.array().sqrt() + options_.rms_eps);
    params_ -= lr * momentum_buf_;
  } else {
    momentum_buf_ = options_.momentum * momentum_buf_ + grad;
    params_ -= lr * momentum_buf_;
  }

  ema_update(teacher_, params_);
  ++step_;
  return tl.breakdown;
}

EpochStats Trainer::run_epoch(const Dataset& train) {
  if (train.size() == 0) throw std::invalid_argument("run_epoch: empty dataset");
  TwoViewConfig view_cfg;
  view_cfg.policy = policy_;
  view_cfg.epsilon_smooth = loss_.epsilon_smooth;
  view_cfg.num_classes = train.num_classes;
  view_cfg.mix_prob = options_.mix_prob;
  view_cfg.mixup_alpha = options_.mixup_alpha;
  view_cfg.cutmix_alpha = options_.cutmix_alpha;

  const std::vector<int> order = rng_.permutation(train.size());
  EpochStats stats;
  int batches = 0;
  double pos_sum = 0.0;
  for (int start = 0; start < train.size(); start += options_.batch_size) {
    const int count = std::min(options_.batch_size, train.size() - start);
    std::vector<std::pair<Image, int>> samples;
    samples.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      const int idx = order[static_cast<std::size_t>(start + i)];
      samples.emplace_back(train.image01(idx), train.labels[static_cast<std::size_t>(idx)]);
    }
    last_batch_rng_state_ = rng_.serialize();
    const TwoViewBatch batch = make_two_view_batch(samples, rng_, view_cfg);
    const LossBreakdown bd = train_step(batch);
    stats.mean.ce += bd.ce;
    stats.mean.rce += bd.rce;
    stats.mean.cr += bd.cr;
    stats.mean.mt += bd.mt;
    stats.mean.aux += bd.aux;
    stats.mean.total += bd.total;
    pos_sum += last_mean_positive_size_;
    ++batches;
  }
  const double inv = 1.0 / static_cast<double>(batches);
  stats.mean.ce *= inv;
  stats.mean.rce *= inv;
  stats.mean.cr *= inv;
  stats.mean.mt *= inv;
  stats.mean.aux *= inv;
  stats.mean.total *= inv;
  stats.mean_positive_size = pos_sum * inv;
  stats.last_lr = lr_at(std::min(step_ > 0 ? step_ - 1 : 0, schedule_.total_steps()), schedule_);
  ++epoch_;
  return stats;
}

EvalMetrics Trainer::evaluate(const Dataset& ds) const {
  return evaluate(ds, options_.eval_fusion, options_.eval_tencrop);
}

EvalMetrics Trainer::evaluate(const Dataset& ds, bool use_fusion, bool use_tencrop) const {
  return attrep::evaluate(net_, params_, teacher_.params, ds, policy_, use_fusion,
                          loss_.fusion_weight, use_tencrop, options_.tencrop_fraction);
}

Trainer::Snapshot Trainer::snapshot() const {
  Snapshot s;
  s.params = params_;
  s.teacher_params = teacher_.params;
  s.square_avg = square_avg_;
  s.momentum_buf = momentum_buf_;
  s.teacher_step_count = teacher_.step_count;
  s.step = step_;
  s.epoch = epoch_;
  s.rng_state = rng_.serialize();
  return s;
}

void Trainer::restore(const Snapshot& snap) {
  if (snap.params.size() != params_.size())
    throw std::invalid_argument("Trainer::restore: parameter count mismatch");
  params_ = snap.params;
  teacher_.params = snap.teacher_params;
  teacher_.step_count = snap.teacher_step_count;
  square_avg_ = snap.square_avg;
  momentum_buf_ = snap.momentum_buf;
  step_ = snap.step;
  epoch_ = snap.epoch;
  rng_ = Rng::deserialize(snap.rng_state);
}

}  // namespace attrep
