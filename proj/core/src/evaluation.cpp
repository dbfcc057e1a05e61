#include "gacl/evaluation.hpp"

#include "gacl/io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>

namespace gacl::eval {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kMinMotion = 1e-6;

// inverse(a) ⊕ b with the quaternion product written so that equal inputs
// cancel term by term; identical trajectories then score exactly zero.
Pose error_between(const Pose& a, const Pose& b) {
  const Quaternion p = a.rotation().conjugate();
  const Quaternion& q = b.rotation();
  const Vector3 t = p * (b.translation() - a.translation());
  const double w = p.w() * q.w() - p.vec().dot(q.vec());
  const Vector3 v = (p.w() * q.vec() + q.w() * p.vec()) + p.vec().cross(q.vec());
  return Pose(t, Quaternion(w, v.x(), v.y(), v.z()));
}

void require_same_length(const Trajectory& gt, const Trajectory& est) {
  if (gt.size() != est.size()) {
    throw LengthMismatch("trajectories differ in length: gt has " + std::to_string(gt.size()) +
                         " poses, estimate has " + std::to_string(est.size()));
  }
}

// Index of the first frame whose path length from `first` reaches `length`,
// or nullopt when the trajectory ends first.
std::optional<std::size_t> segment_end(const std::vector<double>& dist, std::size_t first,
                                       double length) {
  const auto it = std::lower_bound(dist.begin() + static_cast<std::ptrdiff_t>(first), dist.end(),
                                   dist[first] + length);
  if (it == dist.end()) return std::nullopt;
  return static_cast<std::size_t>(it - dist.begin());
}

}  // namespace

double SegmentErrorReport::mean_translation_pct() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.translation_pct;
  return s / static_cast<double>(rows.size());
}

double SegmentErrorReport::mean_rotation_deg_per_m() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.rotation_deg_per_m;
  return s / static_cast<double>(rows.size());
}

SegmentErrorReport segment_errors(const Trajectory& gt, const Trajectory& est,
                                  const std::vector<double>& lengths) {
  require_same_length(gt, est);
  const std::vector<double> dist = gt.path_lengths();
  SegmentErrorReport report;
  for (double len : lengths) {
    if (!(len > 0.0)) throw std::invalid_argument("segment length must be > 0");
    SegmentError row;
    row.length = len;
    double t_sum = 0.0;
    double r_sum = 0.0;
    for (std::size_t first = 0; first < gt.size(); ++first) {
      const auto last = segment_end(dist, first, len);
      if (!last) break;
      const Pose delta_gt = relative_between(gt[first], gt[*last]);
      const Pose delta_est = relative_between(est[first], est[*last]);
      const Pose err = error_between(delta_est, delta_gt);
      t_sum += err.translation().norm() / len;
      r_sum += rotation_angle(err) * kRadToDeg / len;
      ++row.segments;
    }
    if (row.segments == 0) {
      throw SegmentTooLong("no segment of length " + io::format_double(len) +
                           " m (ground-truth path is " + io::format_double(dist.back()) + " m)");
    }
    row.translation_pct = 100.0 * t_sum / static_cast<double>(row.segments);
    row.rotation_deg_per_m = r_sum / static_cast<double>(row.segments);
    report.rows.push_back(row);
  }
  return report;
}

std::vector<double> evaluable_lengths(const Trajectory& gt, const std::vector<double>& candidates) {
  const std::vector<double> dist = gt.path_lengths();
  std::vector<double> out;
  for (double len : candidates) {
    if (len > 0.0 && segment_end(dist, 0, len)) out.push_back(len);
  }
  return out;
}

std::vector<double> default_segment_lengths(const Trajectory& gt) {
  const double total = gt.path_lengths().back();
  return evaluable_lengths(gt, total > kVehicleSegmentLengths.back() ? kVehicleSegmentLengths
                                                                      : kWalkerSegmentLengths);
}

RpeReport rpe(const Trajectory& gt, const Trajectory& est) {
  require_same_length(gt, est);
  RpeReport report;
  double t_sum = 0.0;
  double r_sum = 0.0;
  std::size_t t_count = 0;
  for (std::size_t k = 1; k < gt.size(); ++k) {
    const Pose rel_gt = relative_between(gt[k - 1], gt[k]);
    const Pose rel_est = relative_between(est[k - 1], est[k]);
    const Pose delta = error_between(rel_gt, rel_est);
    ++report.frames;
    r_sum += rotation_angle(delta) * kRadToDeg;
    const double motion = rel_gt.translation().norm();
    if (motion > kMinMotion) {
      t_sum += 100.0 * delta.translation().norm() / motion;
      ++t_count;
    } else {
      ++report.degenerate_frames;
    }
  }
  if (t_count > 0) report.translation_pct = t_sum / static_cast<double>(t_count);
  if (report.frames > 0) report.rotation_deg = r_sum / static_cast<double>(report.frames);
  return report;
}

double AteReport::fraction_within(double threshold) const {
  if (errors.empty()) return 0.0;
  const auto n = std::count_if(errors.begin(), errors.end(), [threshold](double e) { return e <= threshold; });
  return static_cast<double>(n) / static_cast<double>(errors.size());
}

AteReport ate(const Trajectory& gt, const Trajectory& est) {
  require_same_length(gt, est);
  AteReport report;
  double sq = 0.0;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const double e = (est[k].translation() - gt[k].translation()).norm();
    report.errors.push_back(e);
    sq += e * e;
  }
  report.rmse = std::sqrt(sq / static_cast<double>(gt.size()));

  std::vector<double> sorted = report.errors;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    // Ties collapse onto the last index so each error value appears once.
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    report.cdf.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
  }
  return report;
}

void write_segment_csv(std::ostream& out, const SegmentErrorReport& report) {
  out << "length_m,translation_error_pct,rotation_error_deg_per_m,segments\n";
  for (const auto& r : report.rows) {
    out << io::format_double(r.length) << ',' << io::format_double(r.translation_pct) << ','
        << io::format_double(r.rotation_deg_per_m) << ',' << r.segments << '\n';
  }
}

void write_rpe_csv(std::ostream& out, const RpeReport& report) {
  out << "translation_error_pct,rotation_error_deg_per_frame,frames,degenerate_frames\n";
  out << io::format_double(report.translation_pct) << ',' << io::format_double(report.rotation_deg)
      << ',' << report.frames << ',' << report.degenerate_frames << '\n';
}

void write_ate_csv(std::ostream& out, const AteReport& report) {
  out << "frame,position_error_m\n";
  for (std::size_t k = 0; k < report.errors.size(); ++k) {
    out << k << ',' << io::format_double(report.errors[k]) << '\n';
  }
}

void write_ate_cdf_csv(std::ostream& out, const AteReport& report) {
  out << "error_m,fraction\n";
  for (const auto& [e, f] : report.cdf) {
    out << io::format_double(e) << ',' << io::format_double(f) << '\n';
  }
}

}  // namespace gacl::eval
