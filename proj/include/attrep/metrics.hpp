#pragma once

#include <string>
#include <vector>

namespace attrep {

// One row per evaluation epoch. Everything except wall_clock_s is
// deterministic for a fixed config + seed; wall_clock_s therefore goes to a
// timing sidecar (timings.csv) instead of metrics.csv so that metrics.csv is
// byte-identical across reruns.
struct MetricsRecord {
  int epoch = 0;
  double lr = 0.0;
  double ce = 0.0, rce = 0.0, cr = 0.0, mt = 0.0, aux = 0.0, total = 0.0;
  double student_top1 = 0.0;
  double teacher_top1 = 0.0;
  double mean_positive_size = 0.0;
  double wall_clock_s = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "epoch,lr,ce,rce,cr,mt,aux,total,student_top1,teacher_top1,mean_positive_size";
inline constexpr const char* kTimingsHeader = "epoch,wall_clock_s";

// Append-only CSV writers with a fixed column order.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& run_dir);
  void append(const MetricsRecord& rec);

 private:
  std::string metrics_path_;
  std::string timings_path_;
};

std::vector<MetricsRecord> read_metrics_csv(const std::string& path);

}  // namespace attrep
