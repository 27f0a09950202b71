#include "attrep/metrics.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace attrep {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

MetricsWriter::MetricsWriter(const std::string& run_dir) {
  std::filesystem::create_directories(run_dir);
  metrics_path_ = run_dir + "/metrics.csv";
  timings_path_ = run_dir + "/timings.csv";
  if (!std::filesystem::exists(metrics_path_)) {
    std::ofstream out(metrics_path_);
    if (!out) throw std::runtime_error("MetricsWriter: cannot write " + metrics_path_);
    out << kMetricsHeader << "\n";
  }
  if (!std::filesystem::exists(timings_path_)) {
    std::ofstream out(timings_path_);
    out << kTimingsHeader << "\n";
  }
}

void MetricsWriter::append(const MetricsRecord& r) {
  {
    std::ofstream out(metrics_path_, std::ios::app);
    if (!out) throw std::runtime_error("MetricsWriter: cannot append to " + metrics_path_);
    out << r.epoch << ',' << fmt(r.lr) << ',' << fmt(r.ce) << ',' << fmt(r.rce) << ',' << fmt(r.cr)
        << ',' << fmt(r.mt) << ',' << fmt(r.aux) << ',' << fmt(r.total) << ','
        << fmt(r.student_top1) << ',' << fmt(r.teacher_top1) << ',' << fmt(r.mean_positive_size)
        << "\n";
  }
  {
    std::ofstream out(timings_path_, std::ios::app);
    out << r.epoch << ',' << fmt(r.wall_clock_s) << "\n";
  }
}

std::vector<MetricsRecord> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_metrics_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_metrics_csv: empty file " + path);
  if (line != kMetricsHeader)
    throw std::runtime_error("read_metrics_csv: unexpected header in " + path);
  std::vector<MetricsRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    MetricsRecord r;
    char comma;
    ss >> r.epoch >> comma >> r.lr >> comma >> r.ce >> comma >> r.rce >> comma >> r.cr >> comma >>
        r.mt >> comma >> r.aux >> comma >> r.total >> comma >> r.student_top1 >> comma >>
        r.teacher_top1 >> comma >> r.mean_positive_size;
    if (ss.fail()) throw std::runtime_error("read_metrics_csv: malformed row in " + path);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace attrep
