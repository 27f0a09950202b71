#include "attrep/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace attrep {

using nlohmann::json;

namespace {

// Pulls a field if present, then strikes it off; leftovers are rejected.
class StrictObject {
 public:
  StrictObject(const json& j, std::string name) : name_(std::move(name)) {
    if (!j.is_object()) throw std::invalid_argument("config: " + name_ + " must be a JSON object");
    remaining_ = j;
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (auto it = remaining_.find(key); it != remaining_.end()) {
      it->get_to(out);
      remaining_.erase(it);
    }
  }

  json take(const char* key) {
    if (auto it = remaining_.find(key); it != remaining_.end()) {
      json v = *it;
      remaining_.erase(it);
      return v;
    }
    return json();
  }

  void finish() const {
    if (!remaining_.empty()) {
      std::string keys;
      for (auto it = remaining_.begin(); it != remaining_.end(); ++it) {
        if (!keys.empty()) keys += ", ";
        keys += it.key();
      }
      throw std::invalid_argument("config: unknown key(s) in " + name_ + ": " + keys);
    }
  }

 private:
  json remaining_;
  std::string name_;
};

LossConfig loss_from_json(const json& j) {
  LossConfig c;
  StrictObject o(j, "loss");
  o.get("alpha", c.alpha);
  o.get("beta", c.beta);
  o.get("gamma", c.gamma);
  o.get("delta", c.delta);
  o.get("tau", c.tau);
  o.get("eta", c.eta);
  o.get("epsilon_smooth", c.epsilon_smooth);
  o.get("rce_floor", c.rce_floor);
  o.get("aux_weight", c.aux_weight);
  o.get("fusion_weight", c.fusion_weight);
  o.finish();
  return c;
}

json loss_to_json(const LossConfig& c) {
  return json{{"alpha", c.alpha},
              {"beta", c.beta},
              {"gamma", c.gamma},
              {"delta", c.delta},
              {"tau", c.tau},
              {"eta", c.eta},
              {"epsilon_smooth", c.epsilon_smooth},
              {"rce_floor", c.rce_floor},
              {"aux_weight", c.aux_weight},
              {"fusion_weight", c.fusion_weight}};
}

ModelSpec model_from_json(const json& j) {
  ModelSpec m;
  StrictObject o(j, "model");
  o.get("stage_widths", m.stage_widths);
  o.get("blocks_per_stage", m.blocks_per_stage);
  o.get("aux_stage", m.aux_stage);
  o.get("dropout_prob", m.dropout_prob);
  o.get("num_classes", m.num_classes);
  o.get("in_channels", m.in_channels);
  o.get("norm_groups", m.norm_groups);
  o.get("projector", m.projector);
  o.finish();
  return m;
}

json model_to_json(const ModelSpec& m) {
  return json{{"stage_widths", m.stage_widths}, {"blocks_per_stage", m.blocks_per_stage},
              {"aux_stage", m.aux_stage},       {"dropout_prob", m.dropout_prob},
              {"num_classes", m.num_classes},   {"in_channels", m.in_channels},
              {"norm_groups", m.norm_groups},   {"projector", m.projector}};
}

ScheduleConfig schedule_from_json(const json& j) {
  ScheduleConfig s;
  StrictObject o(j, "schedule");
  o.get("base_lr", s.base_lr);
  o.get("warmup_start_lr", s.warmup_start_lr);
  o.get("warmup_epochs", s.warmup_epochs);
  o.get("total_epochs", s.total_epochs);
  o.finish();
  return s;
}

json schedule_to_json(const ScheduleConfig& s) {
  return json{{"base_lr", s.base_lr},
              {"warmup_start_lr", s.warmup_start_lr},
              {"warmup_epochs", s.warmup_epochs},
              {"total_epochs", s.total_epochs}};
}

AugPolicy augment_from_json(const json& j) {
  AugPolicy a;
  StrictObject o(j, "augment");
  o.get("flip_prob", a.flip_prob);
  o.get("crop_padding", a.crop_padding);
  o.get("erase_prob", a.erase_prob);
  o.get("erase_area_lo", a.erase_area_lo);
  o.get("erase_area_hi", a.erase_area_hi);
  o.get("norm_mean", a.norm_mean);
  o.get("norm_std", a.norm_std);
  o.finish();
  return a;
}

json augment_to_json(const AugPolicy& a) {
  return json{{"flip_prob", a.flip_prob},
              {"crop_padding", a.crop_padding},
              {"erase_prob", a.erase_prob},
              {"erase_area_lo", a.erase_area_lo},
              {"erase_area_hi", a.erase_area_hi},
              {"norm_mean", a.norm_mean},
              {"norm_std", a.norm_std}};
}

TrainOptions train_from_json(const json& j) {
  TrainOptions t;
  StrictObject o(j, "train");
  o.get("optimizer", t.optimizer);
  o.get("weight_decay", t.weight_decay);
  o.get("momentum", t.momentum);
  o.get("rms_alpha", t.rms_alpha);
  o.get("rms_eps", t.rms_eps);
  o.get("batch_size", t.batch_size);
  o.get("mix_prob", t.mix_prob);
  o.get("mixup_alpha", t.mixup_alpha);
  o.get("cutmix_alpha", t.cutmix_alpha);
  o.get("cr_space", t.cr_space);
  o.get("cr_normalize", t.cr_normalize);
  o.get("aux_in_cr", t.aux_in_cr);
  o.get("aux_in_mt", t.aux_in_mt);
  o.get("mt_delay_epochs", t.mt_delay_epochs);
  o.get("eval_every", t.eval_every);
  o.get("eval_fusion", t.eval_fusion);
  o.get("eval_tencrop", t.eval_tencrop);
  o.get("tencrop_fraction", t.tencrop_fraction);
  o.finish();
  return t;
}

json train_to_json(const TrainOptions& t) {
  return json{{"optimizer", t.optimizer},
              {"weight_decay", t.weight_decay},
              {"momentum", t.momentum},
              {"rms_alpha", t.rms_alpha},
              {"rms_eps", t.rms_eps},
              {"batch_size", t.batch_size},
              {"mix_prob", t.mix_prob},
              {"mixup_alpha", t.mixup_alpha},
              {"cutmix_alpha", t.cutmix_alpha},
              {"cr_space", t.cr_space},
              {"cr_normalize", t.cr_normalize},
              {"aux_in_cr", t.aux_in_cr},
              {"aux_in_mt", t.aux_in_mt},
              {"mt_delay_epochs", t.mt_delay_epochs},
              {"eval_every", t.eval_every},
              {"eval_fusion", t.eval_fusion},
              {"eval_tencrop", t.eval_tencrop},
              {"tencrop_fraction", t.tencrop_fraction}};
}

DataConfig data_from_json(const json& j) {
  DataConfig d;
  StrictObject o(j, "data");
  o.get("kind", d.kind);
  o.get("dir", d.dir);
  o.get("n_per_class", d.n_per_class);
  o.get("num_classes", d.num_classes);
  o.get("image_size", d.image_size);
  o.get("synthetic_test_per_class", d.synthetic_test_per_class);
  o.get("synthetic_noise", d.synthetic_noise);
  o.get("val_fraction", d.val_fraction);
  o.finish();
  return d;
}

json data_to_json(const DataConfig& d) {
  return json{{"kind", d.kind},
              {"dir", d.dir},
              {"n_per_class", d.n_per_class},
              {"num_classes", d.num_classes},
              {"image_size", d.image_size},
              {"synthetic_test_per_class", d.synthetic_test_per_class},
              {"synthetic_noise", d.synthetic_noise},
              {"val_fraction", d.val_fraction}};
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

void DataConfig::validate() const {
  if (kind != "cifar10" && kind != "synthetic")
    throw std::invalid_argument("DataConfig: kind must be cifar10 or synthetic");
  if (kind == "cifar10" && dir.empty())
    throw std::invalid_argument("DataConfig: cifar10 needs a data directory");
  if (n_per_class < 1) throw std::invalid_argument("DataConfig: n_per_class must be >= 1");
  if (num_classes < 2) throw std::invalid_argument("DataConfig: num_classes must be >= 2");
  if (image_size < 4) throw std::invalid_argument("DataConfig: image_size must be >= 4");
  if (synthetic_test_per_class < 1)
    throw std::invalid_argument("DataConfig: synthetic_test_per_class must be >= 1");
  if (synthetic_noise < 0.0) throw std::invalid_argument("DataConfig: synthetic_noise must be >= 0");
  if (val_fraction <= 0.0 || val_fraction >= 1.0)
    throw std::invalid_argument("DataConfig: val_fraction must be in (0, 1)");
}

void RunConfig::validate() const {
  if (output_dir.empty()) throw std::invalid_argument("RunConfig: output_dir must not be empty");
  data.validate();
  model.validate();
  loss.validate();
  schedule.validate();
  augment.validate();
  train.validate();
  if (model.num_classes != data.num_classes)
    throw std::invalid_argument("RunConfig: model.num_classes must match data.num_classes");
  if (train.cr_space == "feature" && !model.projector)
    throw std::invalid_argument("RunConfig: feature-space CR needs model.projector = true");
}

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  StrictObject o(j, "run config");
  o.get("seed", cfg.seed);
  o.get("output_dir", cfg.output_dir);
  if (json v = o.take("data"); !v.is_null()) cfg.data = data_from_json(v);
  if (json v = o.take("model"); !v.is_null()) cfg.model = model_from_json(v);
  if (json v = o.take("loss"); !v.is_null()) cfg.loss = loss_from_json(v);
  if (json v = o.take("schedule"); !v.is_null()) cfg.schedule = schedule_from_json(v);
  if (json v = o.take("augment"); !v.is_null()) cfg.augment = augment_from_json(v);
  if (json v = o.take("train"); !v.is_null()) cfg.train = train_from_json(v);
  o.finish();
  cfg.validate();
  return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
  return json{{"seed", cfg.seed},
              {"output_dir", cfg.output_dir},
              {"data", data_to_json(cfg.data)},
              {"model", model_to_json(cfg.model)},
              {"loss", loss_to_json(cfg.loss)},
              {"schedule", schedule_to_json(cfg.schedule)},
              {"augment", augment_to_json(cfg.augment)},
              {"train", train_to_json(cfg.train)}};
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_run_config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("load_run_config: " + path + ": " + e.what());
  }
  return run_config_from_json(j);
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_run_config: cannot write " + path);
  out << run_config_to_json(cfg).dump(2) << "\n";
}

std::string config_digest(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(run_config_to_json(cfg).dump())));
  return buf;
}

const char* code_revision() {
#ifdef ATTREP_CODE_REVISION
  return ATTREP_CODE_REVISION;
#else
  return "untracked";
#endif
}

std::string resolve_output_dir(const std::string& dir) {
  const char* root = std::getenv("ATTREP_OUTPUT_ROOT");
  if (root == nullptr || root[0] == '\0') return dir;
  const std::filesystem::path p(dir);
  if (p.is_absolute()) return dir;
  return (std::filesystem::path(root) / p).string();
}

}  // namespace attrep
