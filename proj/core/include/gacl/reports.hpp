#pragma once

#include "gacl/io.hpp"
#include "gacl/svg_plot.hpp"

namespace gacl::plot {

/// Train and validation loss per epoch with dashed stage boundaries.
LineChart chart_from_runlog(const io::CsvTable& runlog);

/// Recognizes ablation curves (one series per mode, averaged over seeds),
/// ablation summaries, alpha sweeps, segment reports and ATE CDFs by their
/// header. Throws io::ParseError for empty or unrecognized tables.
LineChart chart_from_report(const io::CsvTable& report);

/// Top-down (x, y) view of ground truth and estimate.
LineChart trajectory_chart(const Trajectory& gt, const Trajectory& est);

}  // namespace gacl::plot
