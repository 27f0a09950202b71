// attrep: train/eval/ablate/gradcheck/ensemble/plot/export-features CLI.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "attrep/checkpoint.hpp"
#include "attrep/gradcheck.hpp"
#include "attrep/harness.hpp"
#include "attrep/plot.hpp"

using namespace attrep;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
  std::vector<std::uint64_t> seeds;
  std::istringstream ss(csv);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (!tok.empty()) seeds.push_back(std::stoull(tok));
  }
  if (seeds.empty()) throw CLI::ValidationError("--seeds", "no seeds parsed from '" + csv + "'");
  return seeds;
}

Dataset load_eval_dataset(const std::string& data_dir, const RunConfig& cfg) {
  if (!data_dir.empty()) {
    if (fs::is_directory(data_dir)) return load_cifar10_dir(data_dir, "test");
    return load_cifar10_binary(data_dir);
  }
  // fall back to the split the checkpointed config describes
  return load_splits(cfg.data, cfg.seed).eval;
}

// Rebuild a trainer in the exact state of a checkpoint.
Trainer trainer_from_checkpoint(const Checkpoint& ckpt) {
  const DataSplits splits = load_splits(ckpt.config.data, ckpt.config.seed);
  ScheduleConfig sched = ckpt.config.schedule;
  sched.steps_per_epoch =
      (splits.train.size() + ckpt.config.train.batch_size - 1) / ckpt.config.train.batch_size;
  Trainer trainer(ckpt.config.model, ckpt.config.loss, sched, ckpt.config.augment,
                  ckpt.config.train, ckpt.config.seed);
  trainer.restore(ckpt.state);
  return trainer;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attract-and-Repulse training harness"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model from a JSON run config");
  std::string train_config, train_resume;
  std::int64_t train_seed = -1;
  train_cmd->add_option("--config", train_config, "run config JSON")->required();
  train_cmd->add_option("--seed", train_seed, "override the config seed");
  train_cmd->add_option("--resume", train_resume, "checkpoint to continue from");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string eval_ckpt, eval_data;
  bool eval_tencrop = false, eval_no_fusion = false;
  eval_cmd->add_option("--ckpt", eval_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--data", eval_data, "CIFAR-10 dir or .bin file (default: config split)");
  eval_cmd->add_flag("--tencrop", eval_tencrop, "TenCrop inference");
  eval_cmd->add_flag("--no-fusion", eval_no_fusion, "disable auxiliary fusion");

  // ablate
  auto* ablate_cmd = app.add_subcommand("ablate", "Run the cumulative ablation ladder");
  std::string ablate_config, ablate_seeds = "1,2,3", ablate_out;
  int ablate_stages = 6;
  ablate_cmd->add_option("--config", ablate_config, "base run config JSON")->required();
  ablate_cmd->add_option("--seeds", ablate_seeds, "comma-separated seeds");
  ablate_cmd->add_option("--stages", ablate_stages, "ladder length (1..6)");
  ablate_cmd->add_option("--out", ablate_out, "report directory (default: <output_dir>_ablation)");

  // gradcheck
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  bool grad_tiny = false;
  int grad_cases = 100;
  grad_cmd->add_flag("--tiny-model", grad_tiny, "also run the end-to-end tiny-model check");
  grad_cmd->add_option("--cases", grad_cases, "cases per operation");

  // ensemble
  auto* ens_cmd = app.add_subcommand("ensemble", "Average predictions of several checkpoints");
  std::string ens_ckpts, ens_data;
  ens_cmd->add_option("--ckpts", ens_ckpts, "comma-separated checkpoint files")->required();
  ens_cmd->add_option("--data", ens_data, "CIFAR-10 dir or .bin file (default: config split)");

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "Render SVG plots from a run directory");
  std::string plot_dir, plot_ablation_csv;
  plot_cmd->add_option("--run", plot_dir, "run directory containing metrics.csv");
  plot_cmd->add_option("--ablation", plot_ablation_csv, "ablation report.csv");

  // export-features
  auto* feat_cmd = app.add_subcommand("export-features", "Dump penultimate features as CSV");
  std::string feat_ckpt, feat_data, feat_out;
  feat_cmd->add_option("--ckpt", feat_ckpt, "checkpoint file")->required();
  feat_cmd->add_option("--data", feat_data, "CIFAR-10 dir or .bin file (default: config split)");
  feat_cmd->add_option("--out", feat_out, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      RunConfig cfg = load_run_config(train_config);
      if (train_seed >= 0) cfg.seed = static_cast<std::uint64_t>(train_seed);
      const RunResult rr = run_training(cfg, train_resume, &std::cout);
      std::cout << "run dir: " << rr.run_dir << "\nfinal student top-1: "
                << rr.final_metrics.student_top1 << "%\nfinal teacher top-1: "
                << rr.final_metrics.teacher_top1 << "%\n";
    } else if (*eval_cmd) {
      const Checkpoint ckpt = load_checkpoint(eval_ckpt);
      Trainer trainer = trainer_from_checkpoint(ckpt);
      const Dataset ds = load_eval_dataset(eval_data, ckpt.config);
      const EvalMetrics em = trainer.evaluate(ds, !eval_no_fusion, eval_tencrop);
      std::cout << "samples: " << ds.size() << "\nstudent top-1: " << em.student_top1
                << "%\nteacher top-1: " << em.teacher_top1 << "%\n";
    } else if (*ablate_cmd) {
      const RunConfig base = load_run_config(ablate_config);
      const std::string out = ablate_out.empty() ? base.output_dir + "_ablation" : ablate_out;
      const AblationReport report =
          run_ablation(base, ablate_stages, parse_seeds(ablate_seeds), out, &std::cout);
      std::ifstream txt(report.report_txt);
      std::cout << txt.rdbuf();
      plot_ablation(report.report_csv, out + "/ablation.svg");
      std::cout << "report: " << report.report_csv << "\n";
    } else if (*grad_cmd) {
      const GradCheckReport ops = check_loss_gradients(grad_cases, 1e-4, 2024);
      std::cout << "loss ops: " << ops.cases - ops.failures << "/" << ops.cases
                << " passed, worst relative error " << ops.worst_error << "\n";
      int failures = ops.failures;
      if (grad_tiny) {
        const GradCheckReport e2e = check_end_to_end_gradient(grad_cases, 1e-3, 2025);
        std::cout << "end-to-end tiny model: " << e2e.cases - e2e.failures << "/" << e2e.cases
                  << " passed, worst relative error " << e2e.worst_error << "\n";
        failures += e2e.failures;
      }
      return failures == 0 ? 0 : 1;
    } else if (*ens_cmd) {
      std::vector<std::string> paths;
      std::istringstream ss(ens_ckpts);
      for (std::string tok; std::getline(ss, tok, ',');)
        if (!tok.empty()) paths.push_back(tok);
      if (paths.empty()) throw std::invalid_argument("ensemble: no checkpoints given");
      std::vector<std::vector<Vec>> per_model;
      Dataset ds;
      bool have_ds = false;
      for (const auto& path : paths) {
        const Checkpoint ckpt = load_checkpoint(path);
        if (!have_ds) {
          ds = load_eval_dataset(ens_data, ckpt.config);
          have_ds = true;
        }
        Trainer trainer = trainer_from_checkpoint(ckpt);
        const Network& net = trainer.net();
        std::vector<Vec> probs;
        probs.reserve(static_cast<std::size_t>(ds.size()));
        for (int i = 0; i < ds.size(); ++i) {
          Image img = ds.image01(i);
          const AugPolicy& pol = ckpt.config.augment;
          for (int c = 0; c < img.channels; ++c)
            for (int y = 0; y < img.height; ++y)
              for (int x = 0; x < img.width; ++x)
                img.at(c, y, x) = (img.at(c, y, x) - pol.norm_mean[(std::size_t)c]) /
                                  pol.norm_std[(std::size_t)c];
          const ModelOutput o = net.forward_single(trainer.params(), img);
          probs.push_back(aux_fusion(softmax(o.logits), softmax(o.aux_logits),
                                     ckpt.config.loss.fusion_weight));
        }
        per_model.push_back(std::move(probs));
      }
      const std::vector<Vec> mean = ensemble_average(per_model);
      long correct = 0;
      for (int i = 0; i < ds.size(); ++i) {
        Eigen::Index arg;
        mean[(std::size_t)i].maxCoeff(&arg);
        if (static_cast<int>(arg) == ds.labels[(std::size_t)i]) ++correct;
      }
      std::cout << "models: " << paths.size() << "\nsamples: " << ds.size()
                << "\nensemble top-1: " << 100.0 * correct / ds.size() << "%\n";
    } else if (*plot_cmd) {
      if (plot_dir.empty() && plot_ablation_csv.empty())
        throw std::invalid_argument("plot: pass --run and/or --ablation");
      if (!plot_dir.empty()) {
        plot_run(plot_dir);
        std::cout << "wrote " << plot_dir << "/loss_curves.svg and accuracy.svg\n";
      }
      if (!plot_ablation_csv.empty()) {
        const std::string out = fs::path(plot_ablation_csv).parent_path() / "ablation.svg";
        plot_ablation(plot_ablation_csv, out);
        std::cout << "wrote " << out << "\n";
      }
    } else if (*feat_cmd) {
      const Checkpoint ckpt = load_checkpoint(feat_ckpt);
      Trainer trainer = trainer_from_checkpoint(ckpt);
      const Dataset ds = load_eval_dataset(feat_data, ckpt.config);
      export_features(trainer.net(), trainer.params(), ds, ckpt.config.augment, feat_out);
      std::cout << "wrote " << feat_out << " (" << ds.size() << " rows)\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
