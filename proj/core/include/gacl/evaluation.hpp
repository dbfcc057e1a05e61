#pragma once

#include "gacl/geometry.hpp"

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

namespace gacl::eval {

class SegmentTooLong : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class LengthMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline const std::vector<double> kVehicleSegmentLengths{100, 200, 300, 400, 500, 600, 700, 800};
inline const std::vector<double> kWalkerSegmentLengths{5, 10, 15, 20, 25, 30, 35, 40};

struct SegmentError {
  double length = 0.0;              // meters
  double translation_pct = 0.0;     // mean translation error, % of length
  double rotation_deg_per_m = 0.0;  // mean rotation error, degrees per meter
  std::size_t segments = 0;
};

struct SegmentErrorReport {
  std::vector<SegmentError> rows;

  double mean_translation_pct() const;
  double mean_rotation_deg_per_m() const;
};

/// KITTI-style drift: for every start frame and length L, the segment ends at
/// the first frame whose ground-truth path length from the start reaches L.
/// The error pose is inverse(est delta) ⊕ gt delta. No alignment is applied.
/// Throws SegmentTooLong if some requested L has no complete segment.
SegmentErrorReport segment_errors(const Trajectory& gt, const Trajectory& est,
                                  const std::vector<double>& lengths);

/// The subset of `candidates` for which gt has at least one full segment.
std::vector<double> evaluable_lengths(const Trajectory& gt, const std::vector<double>& candidates);

/// KITTI lengths for trajectories longer than 800 m, walker-scale otherwise,
/// restricted to evaluable lengths.
std::vector<double> default_segment_lengths(const Trajectory& gt);

struct RpeReport {
  double translation_pct = 0.0;  // mean over frames with gt motion > 1e-6 m
  double rotation_deg = 0.0;     // mean per-frame rotation error, degrees
  std::size_t frames = 0;
  std::size_t degenerate_frames = 0;  // skipped for translation
};

/// Frame-to-frame error: Δ = inverse(rel_gt) ⊕ rel_est for each step.
RpeReport rpe(const Trajectory& gt, const Trajectory& est);

struct AteReport {
  std::vector<double> errors;                   // per-frame position error, meters
  std::vector<std::pair<double, double>> cdf;   // (error, fraction of frames <= error)
  double rmse = 0.0;

  double fraction_within(double threshold) const;
};

AteReport ate(const Trajectory& gt, const Trajectory& est);

// CSV writers. Headers:
//   segments:  length_m,translation_error_pct,rotation_error_deg_per_m,segments
//   rpe:       translation_error_pct,rotation_error_deg_per_frame,frames,degenerate_frames
//   ate:       frame,position_error_m
//   ate_cdf:   error_m,fraction
void write_segment_csv(std::ostream& out, const SegmentErrorReport& report);
void write_rpe_csv(std::ostream& out, const RpeReport& report);
void write_ate_csv(std::ostream& out, const AteReport& report);
void write_ate_cdf_csv(std::ostream& out, const AteReport& report);

}  // namespace gacl::eval
