#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "civr/solver.hpp"

namespace civr::harness {

inline constexpr const char* kTraceHeader =
    "run_id,epoch,iter,samples,objective,grad_map_sq,wallclock_ns";

void write_trace_csv(std::ostream& out, const std::string& run_id, const RunTrace<double>& trace);

struct CurvePoint {
  SampleCount samples;
  double objective;
  double grad_map_sq;
  std::int64_t runs;  ///< traces contributing at this sample count
};

/// Averages traces on the union of their sample counts. Each trace contributes
/// its last record at or before the grid point; traces with no record yet are
/// left out of that point.
std::vector<CurvePoint> mean_curve(const std::vector<const RunTrace<double>*>& traces);

void write_mean_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

}  // namespace civr::harness
