#include "gacl/reports.hpp"

#include <map>

namespace gacl::plot {

namespace {

void require_rows(const io::CsvTable& t) {
  if (t.rows.empty()) throw io::ParseError(t.source, 1, "report has no data rows");
}

/// Averages y over rows sharing (group, x); groups keep first-seen order.
std::vector<Series> grouped_means(const io::CsvTable& t, const std::string& group,
                                  const std::string& x, const std::string& y) {
  std::vector<std::string> order;
  std::map<std::string, std::map<double, std::pair<double, int>>> acc;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string g = group.empty() ? y : t.text(r, group);
    if (!acc.count(g)) order.push_back(g);
    auto& cell = acc[g][t.number(r, x)];
    cell.first += t.number(r, y);
    cell.second += 1;
  }
  std::vector<Series> out;
  for (const auto& g : order) {
    Series s{g, {}, false};
    for (const auto& [xv, sum] : acc[g]) s.points.emplace_back(xv, sum.first / sum.second);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

LineChart chart_from_runlog(const io::CsvTable& t) {
  require_rows(t);
  for (const char* col : {"epoch", "train_loss", "validation_loss", "transition"}) {
    if (!t.has(col)) throw io::ParseError(t.source, 1, std::string("runlog is missing column '") + col + "'");
  }
  LineChart c;
  c.title = "Training run";
  c.x_label = "epoch";
  c.y_label = "loss per step";
  Series train{"train", {}, false};
  Series val{"validation", {}, false};
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double e = t.number(r, "epoch");
    train.points.emplace_back(e, t.number(r, "train_loss"));
    val.points.emplace_back(e, t.number(r, "validation_loss"));
    if (!t.text(r, "transition").empty() && r + 1 < t.rows.size()) c.vertical_markers.push_back(e + 0.5);
  }
  c.series = {train, val};
  return c;
}

LineChart chart_from_report(const io::CsvTable& t) {
  require_rows(t);
  LineChart c;
  if (t.has("mode") && t.has("epoch") && t.has("validation_translation_pct")) {
    c.title = "Validation translation error by training mode";
    c.x_label = "epoch";
    c.y_label = "translation error (%)";
    c.series = grouped_means(t, "mode", "epoch", "validation_translation_pct");
  } else if (t.has("mode") && t.has("seed") && t.has("segment_translation_pct")) {
    c.title = "Held-out segment translation error by seed";
    c.x_label = "seed";
    c.y_label = "translation error (%)";
    c.series = grouped_means(t, "mode", "seed", "segment_translation_pct");
    for (auto& s : c.series) s.markers = true;
  } else if (t.has("alpha") && t.has("normalized_translation") && t.has("normalized_rotation")) {
    c.title = "Normalized validation error vs alpha";
    c.x_label = "alpha";
    c.y_label = "normalized error";
    auto tr = grouped_means(t, "", "alpha", "normalized_translation");
    auto rot = grouped_means(t, "", "alpha", "normalized_rotation");
    tr.front().label = "translation";
    rot.front().label = "rotation";
    c.series = {tr.front(), rot.front()};
    for (auto& s : c.series) s.markers = true;
  } else if (t.has("length_m") && t.has("translation_error_pct")) {
    c.title = "Segment translation error";
    c.x_label = "segment length (m)";
    c.y_label = "translation error (%)";
    c.series = grouped_means(t, "", "length_m", "translation_error_pct");
    c.series.front().label = "translation";
    c.series.front().markers = true;
  } else if (t.has("error_m") && t.has("fraction")) {
    c.title = "ATE cumulative distribution";
    c.x_label = "position error (m)";
    c.y_label = "fraction of frames";
    Series s{"ATE", {}, false};
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      s.points.emplace_back(t.number(r, "error_m"), t.number(r, "fraction"));
    }
    c.series = {s};
  } else {
    throw io::ParseError(t.source, 1, "unrecognized report header");
  }
  return c;
}

LineChart trajectory_chart(const Trajectory& gt, const Trajectory& est) {
  LineChart c;
  c.title = "Trajectory (top view)";
  c.x_label = "x (m)";
  c.y_label = "y (m)";
  c.equal_aspect = true;
  for (const auto* traj : {&gt, &est}) {
    Series s{traj == &gt ? "ground truth" : "estimate", {}, false};
    for (const auto& p : traj->poses()) s.points.emplace_back(p.translation().x(), p.translation().y());
    c.series.push_back(std::move(s));
  }
  return c;
}

}  // namespace gacl::plot
