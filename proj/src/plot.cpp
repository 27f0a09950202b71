#include "attrep/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "attrep/metrics.hpp"

namespace attrep {

namespace {

constexpr int kWidth = 640, kHeight = 400;
constexpr int kMarginLeft = 60, kMarginRight = 20, kMarginTop = 30, kMarginBottom = 40;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

struct Series {
  std::string name;
  std::vector<double> x, y;
};

double nice_max(double v) {
  if (v <= 0.0) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(v)));
  return std::ceil(v / mag) * mag;
}

void write_svg(const std::string& path, const std::string& title,
               const std::vector<Series>& series, const std::string& x_label,
               const std::string& y_label) {
  double xmax = 1.0, ymax = 0.0, ymin = 0.0;
  for (const auto& s : series) {
    for (double v : s.x) xmax = std::max(xmax, v);
    for (double v : s.y) {
      ymax = std::max(ymax, v);
      ymin = std::min(ymin, v);
    }
  }
  ymax = nice_max(ymax);
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto sx = [&](double x) { return kMarginLeft + plot_w * (x / xmax); };
  auto sy = [&](double y) { return kMarginTop + plot_h * (1.0 - (y - ymin) / (ymax - ymin)); };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("plot: cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";
  // axes
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
      << "\" y2=\"" << kHeight - kMarginBottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kHeight - kMarginBottom << "\" x2=\""
      << kWidth - kMarginRight << "\" y2=\"" << kHeight - kMarginBottom
      << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double y = ymin + (ymax - ymin) * tick / 4.0;
    out << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << sy(y) + 4
        << "\" text-anchor=\"end\" font-size=\"10\">" << y << "</text>\n";
    const double x = xmax * tick / 4.0;
    out << "<text x=\"" << sx(x) << "\" y=\"" << kHeight - kMarginBottom + 14
        << "\" text-anchor=\"middle\" font-size=\"10\">" << x << "</text>\n";
  }
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 8
      << "\" text-anchor=\"middle\" font-size=\"11\">" << x_label << "</text>\n";
  out << "<text x=\"14\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" font-size=\"11\" "
      << "transform=\"rotate(-90 14 " << kHeight / 2 << ")\">" << y_label << "</text>\n";

  int color = 0;
  int legend_y = kMarginTop + 4;
  for (const auto& s : series) {
    const char* c = kPalette[color % 6];
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) pts << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
    out << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\""
        << pts.str() << "\"/>\n";
    out << "<text x=\"" << kWidth - kMarginRight - 4 << "\" y=\"" << legend_y
        << "\" text-anchor=\"end\" font-size=\"10\" fill=\"" << c << "\">" << s.name
        << "</text>\n";
    legend_y += 13;
    ++color;
  }
  out << "</svg>\n";
}

}  // namespace

void plot_run(const std::string& run_dir) {
  const std::vector<MetricsRecord> rows = read_metrics_csv(run_dir + "/metrics.csv");
  if (rows.empty()) throw std::runtime_error("plot_run: no metrics rows in " + run_dir);

  std::vector<Series> losses(6);
  const char* names[6] = {"ce", "rce", "cr", "mt", "aux", "total"};
  for (int i = 0; i < 6; ++i) losses[static_cast<std::size_t>(i)].name = names[i];
  std::vector<Series> acc(2);
  acc[0].name = "student_top1";
  acc[1].name = "teacher_top1";
  for (const auto& r : rows) {
    const double vals[6] = {r.ce, r.rce, r.cr, r.mt, r.aux, r.total};
    for (int i = 0; i < 6; ++i) {
      losses[static_cast<std::size_t>(i)].x.push_back(r.epoch);
      losses[static_cast<std::size_t>(i)].y.push_back(vals[i]);
    }
    acc[0].x.push_back(r.epoch);
    acc[0].y.push_back(r.student_top1);
    acc[1].x.push_back(r.epoch);
    acc[1].y.push_back(r.teacher_top1);
  }
  write_svg(run_dir + "/loss_curves.svg", "Training loss components", losses, "epoch", "loss");
  write_svg(run_dir + "/accuracy.svg", "Top-1 accuracy", acc, "epoch", "top-1 (%)");
}

void plot_ablation(const std::string& report_csv, const std::string& out_svg) {
  std::ifstream in(report_csv);
  if (!in) throw std::runtime_error("plot_ablation: cannot open " + report_csv);
  std::string line;
  std::getline(in, line);  // header
  std::istringstream hs(line);
  std::vector<std::string> cols;
  for (std::string col; std::getline(hs, col, ',');) cols.push_back(col);
  int mean_col = -1;
  for (std::size_t i = 0; i < cols.size(); ++i)
    if (cols[i] == "student_mean") mean_col = static_cast<int>(i);
  if (mean_col < 0) throw std::runtime_error("plot_ablation: no student_mean column");

  std::vector<std::pair<std::string, double>> bars;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::vector<std::string> fields;
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    bars.emplace_back(fields.at(0), std::stod(fields.at(static_cast<std::size_t>(mean_col))));
  }
  if (bars.empty()) throw std::runtime_error("plot_ablation: empty report");

  double ymax = 0.0;
  for (const auto& [name, v] : bars) ymax = std::max(ymax, v);
  ymax = nice_max(ymax);
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const double bar_w = plot_w / bars.size() * 0.7;

  std::ofstream out(out_svg);
  if (!out) throw std::runtime_error("plot_ablation: cannot write " + out_svg);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2
      << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">Ablation ladder (student top-1 %)"
      << "</text>\n";
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double cx = kMarginLeft + plot_w * (static_cast<double>(i) + 0.5) / bars.size();
    const double h = plot_h * bars[i].second / ymax;
    out << "<rect x=\"" << cx - bar_w / 2 << "\" y=\"" << kMarginTop + plot_h - h << "\" width=\""
        << bar_w << "\" height=\"" << h << "\" fill=\"" << kPalette[i % 6] << "\"/>\n";
    out << "<text x=\"" << cx << "\" y=\"" << kMarginTop + plot_h - h - 4
        << "\" text-anchor=\"middle\" font-size=\"10\">" << bars[i].second << "</text>\n";
    out << "<text x=\"" << cx << "\" y=\"" << kHeight - kMarginBottom + 14
        << "\" text-anchor=\"middle\" font-size=\"9\">" << bars[i].first << "</text>\n";
  }
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kHeight - kMarginBottom << "\" x2=\""
      << kWidth - kMarginRight << "\" y2=\"" << kHeight - kMarginBottom
      << "\" stroke=\"black\"/>\n</svg>\n";
}

}  // namespace attrep
