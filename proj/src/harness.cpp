#include "attrep/harness.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace attrep {

namespace fs = std::filesystem;

DataSplits load_splits(const DataConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  DataSplits splits;
  if (cfg.kind == "cifar10") {
    Dataset train_full = load_cifar10_dir(cfg.dir, "train");
    splits.train = subsample_per_class(train_full, cfg.n_per_class, seed);
    const std::string test_file = cfg.dir + "/test_batch.bin";
    if (fs::exists(test_file)) {
      splits.eval = load_cifar10_binary(test_file);
      splits.eval.split_tag = "test";
    } else {
      // No held-out file: carve val_fraction per class from the full train
      // pool, disjoint from the training subsample.
      const int val_n = std::max(1, static_cast<int>(std::lround(
                                        cfg.val_fraction * static_cast<double>(cfg.n_per_class))));
      auto [sub, rest] = split_per_class(train_full, cfg.n_per_class, seed);
      splits.train = std::move(sub);
      splits.eval = subsample_per_class(rest, val_n, seed + 1);
      splits.eval.split_tag = "val";
    }
  } else {
    // One pool with shared class templates, split into train/test.
    const int pool = cfg.n_per_class + cfg.synthetic_test_per_class;
    const Dataset full = make_synthetic_blobs(cfg.num_classes, pool, cfg.image_size, seed,
                                              cfg.synthetic_noise);
    auto [train, test] = split_per_class(full, cfg.n_per_class, seed + 1);
    splits.train = std::move(train);
    splits.eval = std::move(test);
    splits.train.split_tag = "synthetic:train";
    splits.eval.split_tag = "synthetic:test";
  }
  splits.train.validate();
  splits.eval.validate();
  return splits;
}

RunResult run_training(const RunConfig& cfg_in, const std::string& resume_from, std::ostream* log) {
  RunConfig cfg = cfg_in;
  cfg.validate();
  const std::string run_dir = resolve_output_dir(cfg.output_dir);
  fs::create_directories(run_dir);

  DataSplits splits = load_splits(cfg.data, cfg.seed);

  ScheduleConfig sched = cfg.schedule;
  sched.steps_per_epoch =
      (splits.train.size() + cfg.train.batch_size - 1) / cfg.train.batch_size;

  Trainer trainer(cfg.model, cfg.loss, sched, cfg.augment, cfg.train, cfg.seed);

  if (!resume_from.empty()) {
    const Checkpoint ckpt = load_checkpoint(resume_from);
    if (config_digest(ckpt.config) != config_digest(cfg))
      throw CheckpointError("run_training: checkpoint config digest does not match the run config");
    trainer.restore(ckpt.state);
  }

  save_run_config(cfg, run_dir + "/config.json");
  {
    std::ofstream v(run_dir + "/code_version.txt");
    v << "revision=" << code_revision() << "\nconfig_digest=" << config_digest(cfg) << "\n";
  }
  MetricsWriter writer(run_dir);

  RunResult result;
  result.run_dir = run_dir;

  const auto save = [&](const Trainer& t) {
    Checkpoint ckpt;
    ckpt.config = cfg;
    ckpt.state = t.snapshot();
    save_checkpoint(ckpt, run_dir + "/checkpoint.bin");
  };

  const auto t0 = std::chrono::steady_clock::now();
  for (int epoch = trainer.epoch(); epoch < sched.total_epochs; epoch = trainer.epoch()) {
    const EpochStats stats = trainer.run_epoch(splits.train);
    const bool is_last = trainer.epoch() == sched.total_epochs;
    const bool eval_now =
        is_last || (cfg.train.eval_every > 0 && trainer.epoch() % cfg.train.eval_every == 0);
    if (!eval_now) continue;

    const EvalMetrics em = trainer.evaluate(splits.eval);
    MetricsRecord rec;
    rec.epoch = trainer.epoch();
    rec.lr = stats.last_lr;
    rec.ce = stats.mean.ce;
    rec.rce = stats.mean.rce;
    rec.cr = stats.mean.cr;
    rec.mt = stats.mean.mt;
    rec.aux = stats.mean.aux;
    rec.total = stats.mean.total;
    rec.student_top1 = em.student_top1;
    rec.teacher_top1 = em.teacher_top1;
    rec.mean_positive_size = stats.mean_positive_size;
    rec.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    writer.append(rec);
    result.records.push_back(rec);
    result.final_metrics = em;
    result.final_breakdown = stats.mean;
    save(trainer);
    if (log)
      *log << "epoch " << rec.epoch << " total " << rec.total << " student " << rec.student_top1
           << "% teacher " << rec.teacher_top1 << "%\n";
  }
  return result;
}

std::vector<std::string> ablation_ladder() {
  return {"baseline", "+sce", "+cr", "+mt", "+aux_classifier", "+aux_fusion"};
}

RunConfig ablation_stage_config(const RunConfig& base, int stage) {
  if (stage < 0 || stage >= static_cast<int>(ablation_ladder().size()))
    throw std::invalid_argument("ablation_stage_config: stage out of range");
  RunConfig cfg = base;
  if (stage < 1) cfg.loss.alpha = 0.0;
  if (stage < 2) cfg.loss.beta = 0.0;
  if (stage < 3) cfg.loss.gamma = 0.0;
  if (stage < 4) cfg.loss.aux_weight = 0.0;
  cfg.train.eval_fusion = stage >= 5;
  return cfg;
}

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  int n = 0;
  for (double x : v)
    if (std::isfinite(x)) {
      s += x;
      ++n;
    }
  return n > 0 ? s / n : std::numeric_limits<double>::quiet_NaN();
}

double stddev_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  int n = 0;
  for (double x : v)
    if (std::isfinite(x)) {
      s += (x - m) * (x - m);
      ++n;
    }
  return n > 1 ? std::sqrt(s / (n - 1)) : 0.0;
}

std::string fmt1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

AblationReport run_ablation(const RunConfig& base, int num_stages,
                            const std::vector<std::uint64_t>& seeds, const std::string& out_dir,
                            std::ostream* log) {
  const auto ladder = ablation_ladder();
  if (num_stages < 1 || num_stages > static_cast<int>(ladder.size()))
    throw std::invalid_argument("run_ablation: num_stages must be in [1, " +
                                std::to_string(ladder.size()) + "]");
  if (seeds.empty()) throw std::invalid_argument("run_ablation: need at least one seed");
  const std::string root = resolve_output_dir(out_dir);
  fs::create_directories(root);

  AblationReport report;
  report.rows.resize(static_cast<std::size_t>(num_stages));

  // The +aux_fusion stage shares the +aux_classifier training; it only
  // re-evaluates that stage's checkpoints with fusion enabled.
  for (int stage = 0; stage < num_stages; ++stage) {
    AblationRow& row = report.rows[static_cast<std::size_t>(stage)];
    row.stage = ladder[static_cast<std::size_t>(stage)];
    const bool eval_only = row.stage == "+aux_fusion";
    for (std::size_t si = 0; si < seeds.size(); ++si) {
      const std::uint64_t seed = seeds[si];
      RunConfig cfg = ablation_stage_config(base, stage);
      cfg.seed = seed;
      const int train_stage = eval_only ? stage - 1 : stage;
      const std::string stage_dir =
          root + "/stage" + std::to_string(train_stage) + "_" +
          ladder[static_cast<std::size_t>(train_stage)].substr(train_stage > 0 ? 1 : 0) + "_seed" +
          std::to_string(seed);
      cfg.output_dir = stage_dir;
      try {
        if (eval_only) {
          const Checkpoint ckpt = load_checkpoint(stage_dir + "/checkpoint.bin");
          Trainer trainer(ckpt.config.model, ckpt.config.loss, ckpt.config.schedule,
                          ckpt.config.augment, ckpt.config.train, ckpt.config.seed);
          trainer.restore(ckpt.state);
          const DataSplits splits = load_splits(ckpt.config.data, ckpt.config.seed);
          const EvalMetrics em =
              trainer.evaluate(splits.eval, /*use_fusion=*/true, base.train.eval_tencrop);
          row.student_top1.push_back(em.student_top1);
          row.teacher_top1.push_back(em.teacher_top1);
        } else {
          const RunResult rr = run_training(cfg, "", log);
          row.student_top1.push_back(rr.final_metrics.student_top1);
          row.teacher_top1.push_back(rr.final_metrics.teacher_top1);
        }
      } catch (const std::exception& e) {
        row.student_top1.push_back(std::numeric_limits<double>::quiet_NaN());
        row.teacher_top1.push_back(std::numeric_limits<double>::quiet_NaN());
        row.failures.push_back("seed " + std::to_string(seed) + ": " + e.what());
      }
      if (log)
        *log << row.stage << " seed " << seed << " -> student "
             << (row.student_top1.empty() ? -1.0 : row.student_top1.back()) << "%\n";
    }
    row.mean = mean_of(row.student_top1);
    row.stddev = stddev_of(row.student_top1);
  }

  // report.csv
  report.report_csv = root + "/report.csv";
  {
    std::ofstream out(report.report_csv);
    out << "stage";
    for (std::size_t si = 0; si < seeds.size(); ++si)
      out << ",student_seed" << seeds[si] << ",teacher_seed" << seeds[si];
    out << ",student_mean,student_std\n";
    for (const auto& row : report.rows) {
      out << row.stage;
      for (std::size_t si = 0; si < seeds.size(); ++si) {
        out << ',' << (si < row.student_top1.size() ? fmt1(row.student_top1[si]) : "nan");
        out << ',' << (si < row.teacher_top1.size() ? fmt1(row.teacher_top1[si]) : "nan");
      }
      out << ',' << fmt1(row.mean) << ',' << fmt1(row.stddev) << "\n";
    }
  }
  // report.txt
  report.report_txt = root + "/report.txt";
  {
    std::ofstream out(report.report_txt);
    out << "Ablation ladder (student top-1 %, mean +/- std over " << seeds.size() << " seeds)\n";
    for (const auto& row : report.rows) {
      out << "  " << row.stage;
      for (std::size_t pad = row.stage.size(); pad < 18; ++pad) out << ' ';
      out << fmt1(row.mean) << " +/- " << fmt1(row.stddev) << "\n";
      for (const auto& f : row.failures) out << "    FAILED " << f << "\n";
    }
  }
  return report;
}

std::vector<Vec> ensemble_average(const std::vector<std::vector<Vec>>& per_model_probs) {
  if (per_model_probs.empty()) throw std::invalid_argument("ensemble_average: need at least one model");
  const std::size_t samples = per_model_probs[0].size();
  if (samples == 0) throw std::invalid_argument("ensemble_average: no samples");
  const Eigen::Index classes = per_model_probs[0][0].size();
  for (const auto& model : per_model_probs) {
    if (model.size() != samples)
      throw std::invalid_argument("ensemble_average: misaligned sample counts");
    for (const auto& p : model)
      if (p.size() != classes) throw std::invalid_argument("ensemble_average: misaligned class counts");
  }
  std::vector<Vec> mean(samples, Vec::Zero(classes));
  for (const auto& model : per_model_probs)
    for (std::size_t i = 0; i < samples; ++i) mean[i] += model[i];
  for (auto& p : mean) p /= static_cast<double>(per_model_probs.size());
  return mean;
}

void export_features(const Network& net, const Eigen::VectorXd& params, const Dataset& ds,
                     const AugPolicy& policy, const std::string& path) {
  ds.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_features: cannot write " + path);
  const int f = net.spec().feature_width();
  out << "label";
  for (int i = 0; i < f; ++i) out << ",f" << i;
  out << "\n";
  const int chunk = 256;
  for (int start = 0; start < ds.size(); start += chunk) {
    const int count = std::min(chunk, ds.size() - start);
    std::vector<Image> views;
    views.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      Image img = ds.image01(start + i);
      for (int c = 0; c < img.channels; ++c) {
        const double mean = policy.norm_mean[static_cast<std::size_t>(c)];
        const double inv_std = 1.0 / policy.norm_std[static_cast<std::size_t>(c)];
        for (int y = 0; y < img.height; ++y)
          for (int x = 0; x < img.width; ++x) img.at(c, y, x) = (img.at(c, y, x) - mean) * inv_std;
      }
      views.push_back(std::move(img));
    }
    const BatchOutput bo = net.forward(params, views, /*training=*/false);
    for (int i = 0; i < count; ++i) {
      out << ds.labels[static_cast<std::size_t>(start + i)];
      for (int j = 0; j < f; ++j) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.9g", bo.features(i, j));
        out << ',' << buf;
      }
      out << "\n";
    }
  }
}

}  // namespace attrep
