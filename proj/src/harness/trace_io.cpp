#include "civr/harness/trace_io.hpp"

#include <algorithm>
#include <ostream>

#include "civr/harness/config.hpp"

namespace civr::harness {

void write_trace_csv(std::ostream& out, const std::string& run_id, const RunTrace<double>& trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.records) {
    out << run_id << ',' << r.epoch << ',' << r.iter << ',' << r.samples << ','
        << format_double(r.objective) << ',' << format_double(r.grad_map_sq) << ','
        << r.wallclock_ns << '\n';
  }
}

std::vector<CurvePoint> mean_curve(const std::vector<const RunTrace<double>*>& traces) {
  std::vector<SampleCount> grid;
  for (const auto* t : traces)
    for (const auto& r : t->records) grid.push_back(r.samples);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<std::size_t> cursor(traces.size(), 0);
  std::vector<CurvePoint> curve;
  curve.reserve(grid.size());
  for (const SampleCount s : grid) {
    CurvePoint p{s, 0.0, 0.0, 0};
    for (std::size_t k = 0; k < traces.size(); ++k) {
      const auto& recs = traces[k]->records;
      // several records may share a sample count; the last one wins
      while (cursor[k] < recs.size() && recs[cursor[k]].samples <= s) ++cursor[k];
      if (cursor[k] == 0) continue;
      const auto& r = recs[cursor[k] - 1];
      p.objective += r.objective;
      p.grad_map_sq += r.grad_map_sq;
      ++p.runs;
    }
    if (p.runs == 0) continue;
    p.objective /= double(p.runs);
    p.grad_map_sq /= double(p.runs);
    curve.push_back(p);
  }
  return curve;
}

void write_mean_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "samples,objective,grad_map_sq,runs\n";
  for (const auto& p : curve) {
    out << p.samples << ',' << format_double(p.objective) << ',' << format_double(p.grad_map_sq)
        << ',' << p.runs << '\n';
  }
}

}  // namespace civr::harness
