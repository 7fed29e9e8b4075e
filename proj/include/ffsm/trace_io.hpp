#pragma once

#include <string>
#include <vector>

#include "ffsm/sim.hpp"

namespace ffsm {

// Fixed CSV schema, one row per tick, header always present. Values are
// written with 17 significant digits so traces diff exactly.
extern const std::vector<std::string> kTraceColumns;

void write_trace_csv(const SimTrace& trace, const std::string& path);
SimTrace read_trace_csv(const std::string& path);

struct RunSummary {
  double final_abs_omega_b = 0.0;
  double final_abs_attitude_err = 0.0;  // wrapped |theta_b - theta_bd|
  double final_dx_norm = 0.0;
  double max_dx_norm = 0.0;
  double final_dx_dot_norm = 0.0;
  double mean_dx_norm_last_5s = 0.0;
  double max_momentum_drift = 0.0;
  long guard_h_count = 0;
  long guard_c_count = 0;
  double min_Hb_hat = 0.0;
  // mean of y1^2 and |y2|^2 over the first and last 2 s windows
  double y1_sq_first_window = 0.0;
  double y1_sq_last_window = 0.0;
  double y2_sq_first_window = 0.0;
  double y2_sq_last_window = 0.0;
};

// Every summary entry is derived from trace rows alone.
RunSummary summarize(const SimTrace& trace, double theta_bd);
void write_summary(const RunSummary& summary, const std::string& path,
                   const std::string& label);

// gnuplot script over the emitted CSV reproducing the standard panels
// (base rate, attitude, tracking errors, parameter estimates, Hb estimate).
void write_plot_script(const std::string& path, const std::vector<std::string>& csv_files);

}  // namespace ffsm
