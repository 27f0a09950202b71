#pragma once

#include <string>

namespace attrep {

// SVG renderings built purely from the persisted CSVs.
// loss_curves.svg: loss components vs epoch; accuracy.svg: top-1 vs epoch.
void plot_run(const std::string& run_dir);

// Bar chart of per-stage mean top-1 from an ablation report.csv.
void plot_ablation(const std::string& report_csv, const std::string& out_svg);

}  // namespace attrep
