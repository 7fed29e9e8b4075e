#include "ffsm/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ffsm {

const std::vector<std::string> kTraceColumns = [] {
  std::vector<std::string> cols = {"t", "theta_b", "omega_b"};
  for (int i = 1; i <= 3; ++i) cols.push_back("phi_" + std::to_string(i));
  for (int i = 1; i <= 3; ++i) cols.push_back("phi_dot_cmd_" + std::to_string(i));
  cols.insert(cols.end(), {"x_1", "x_2", "dx_1", "dx_2", "dx_dot_1", "dx_dot_2",
                           "s_b", "s_x_1", "s_x_2", "y1", "y2_1", "y2_2"});
  for (int i = 1; i <= 11; ++i) cols.push_back("a_d_hat_" + std::to_string(i));
  for (int i = 1; i <= 6; ++i) cols.push_back("a_k_hat_" + std::to_string(i));
  cols.insert(cols.end(), {"Hb_hat", "momentum_drift", "guard_h_count", "guard_c_count"});
  return cols;
}();

namespace {

void append_row_values(const TraceRow& r, std::vector<double>& v) {
  v.clear();
  v.insert(v.end(), {r.t, r.theta_b, r.omega_b});
  for (int i = 0; i < 3; ++i) v.push_back(r.phi(i));
  for (int i = 0; i < 3; ++i) v.push_back(r.phi_dot_cmd(i));
  v.insert(v.end(), {r.x(0), r.x(1), r.dx(0), r.dx(1), r.dx_dot(0), r.dx_dot(1),
                     r.s_b, r.s_x(0), r.s_x(1), r.y1, r.y2(0), r.y2(1)});
  for (int i = 0; i < 11; ++i) v.push_back(r.a_d_hat(i));
  for (int i = 0; i < 6; ++i) v.push_back(r.a_k_hat(i));
  v.insert(v.end(), {r.Hb_hat, r.momentum_drift, static_cast<double>(r.guard_h_count),
                     static_cast<double>(r.guard_c_count)});
}

TraceRow row_from_values(const std::vector<double>& v) {
  TraceRow r;
  size_t i = 0;
  r.t = v[i++];
  r.theta_b = v[i++];
  r.omega_b = v[i++];
  for (int k = 0; k < 3; ++k) r.phi(k) = v[i++];
  for (int k = 0; k < 3; ++k) r.phi_dot_cmd(k) = v[i++];
  for (int k = 0; k < 2; ++k) r.x(k) = v[i++];
  for (int k = 0; k < 2; ++k) r.dx(k) = v[i++];
  for (int k = 0; k < 2; ++k) r.dx_dot(k) = v[i++];
  r.s_b = v[i++];
  for (int k = 0; k < 2; ++k) r.s_x(k) = v[i++];
  r.y1 = v[i++];
  for (int k = 0; k < 2; ++k) r.y2(k) = v[i++];
  for (int k = 0; k < 11; ++k) r.a_d_hat(k) = v[i++];
  for (int k = 0; k < 6; ++k) r.a_k_hat(k) = v[i++];
  r.Hb_hat = v[i++];
  r.momentum_drift = v[i++];
  r.guard_h_count = static_cast<long>(v[i++]);
  r.guard_c_count = static_cast<long>(v[i++]);
  return r;
}

}  // namespace

void write_trace_csv(const SimTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trace file '" + path + "'");
  for (size_t i = 0; i < kTraceColumns.size(); ++i)
    out << (i ? "," : "") << kTraceColumns[i];
  out << "\n";
  char buf[32];
  std::vector<double> vals;
  for (const auto& row : trace.rows) {
    append_row_values(row, vals);
    for (size_t i = 0; i < vals.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", vals[i]);
      out << (i ? "," : "") << buf;
    }
    out << "\n";
  }
}

SimTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty trace file");
  {
    std::stringstream header(line);
    std::string col;
    size_t n = 0;
    while (std::getline(header, col, ',')) {
      if (n >= kTraceColumns.size() || col != kTraceColumns[n])
        throw ConfigError(path + ": unexpected column '" + col + "'");
      ++n;
    }
    if (n != kTraceColumns.size()) throw ConfigError(path + ": truncated header");
  }
  SimTrace trace;
  std::vector<double> vals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    vals.clear();
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != kTraceColumns.size())
      throw ConfigError(path + ": row with " + std::to_string(vals.size()) + " cells");
    trace.rows.push_back(row_from_values(vals));
  }
  if (trace.rows.size() >= 2) trace.dt = trace.rows[1].t - trace.rows[0].t;
  return trace;
}

RunSummary summarize(const SimTrace& trace, double theta_bd) {
  RunSummary s;
  if (trace.rows.empty()) return s;
  const TraceRow& last = trace.rows.back();
  s.final_abs_omega_b = std::abs(last.omega_b);
  s.final_abs_attitude_err = std::abs(std::remainder(last.theta_b - theta_bd, 2.0 * M_PI));
  s.final_dx_norm = last.dx.norm();
  s.final_dx_dot_norm = last.dx_dot.norm();
  s.guard_h_count = last.guard_h_count;
  s.guard_c_count = last.guard_c_count;
  s.min_Hb_hat = trace.rows.front().Hb_hat;
  for (const auto& r : trace.rows) {
    s.max_dx_norm = std::max(s.max_dx_norm, r.dx.norm());
    s.max_momentum_drift = std::max(s.max_momentum_drift, r.momentum_drift);
    s.min_Hb_hat = std::min(s.min_Hb_hat, r.Hb_hat);
  }

  const double t_end = last.t;
  double sum = 0.0;
  long count = 0;
  for (const auto& r : trace.rows) {
    if (r.t >= t_end - 5.0) {
      sum += r.dx.norm();
      ++count;
    }
  }
  s.mean_dx_norm_last_5s = count ? sum / static_cast<double>(count) : 0.0;

  const auto window_mean = [&](double lo, double hi, bool use_y1) {
    double acc = 0.0;
    long n = 0;
    for (const auto& r : trace.rows) {
      if (r.t >= lo && r.t < hi) {
        acc += use_y1 ? r.y1 * r.y1 : r.y2.squaredNorm();
        ++n;
      }
    }
    return n ? acc / static_cast<double>(n) : 0.0;
  };
  s.y1_sq_first_window = window_mean(0.0, 2.0, true);
  s.y1_sq_last_window = window_mean(t_end - 2.0, t_end + trace.dt, true);
  s.y2_sq_first_window = window_mean(0.0, 2.0, false);
  s.y2_sq_last_window = window_mean(t_end - 2.0, t_end + trace.dt, false);
  return s;
}

void write_summary(const RunSummary& s, const std::string& path, const std::string& label) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw ConfigError("cannot write summary file '" + path + "'");
  char buf[64];
  const auto emit = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << label << "." << key << " = " << buf << "\n";
  };
  emit("final_abs_omega_b_rad_per_s", s.final_abs_omega_b);
  emit("final_abs_attitude_err_rad", s.final_abs_attitude_err);
  emit("final_dx_norm_m", s.final_dx_norm);
  emit("max_dx_norm_m", s.max_dx_norm);
  emit("final_dx_dot_norm_m_per_s", s.final_dx_dot_norm);
  emit("mean_dx_norm_last_5s_m", s.mean_dx_norm_last_5s);
  emit("max_momentum_drift_rel", s.max_momentum_drift);
  out << label << ".guard_h_count = " << s.guard_h_count << "\n";
  out << label << ".guard_c_count = " << s.guard_c_count << "\n";
  emit("min_Hb_hat_kgm2", s.min_Hb_hat);
  emit("y1_sq_first_window", s.y1_sq_first_window);
  emit("y1_sq_last_window", s.y1_sq_last_window);
  emit("y2_sq_first_window", s.y2_sq_first_window);
  emit("y2_sq_last_window", s.y2_sq_last_window);
}

void write_plot_script(const std::string& path, const std::vector<std::string>& csv_files) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write plot script '" + path + "'");
  out << "# gnuplot script over the trace CSV files\n";
  out << "set datafile separator ','\n";
  out << "set key autotitle columnhead\n";
  out << "set grid\n\n";
  const auto panel = [&](const std::string& title, const std::string& ylabel,
                         const std::vector<std::pair<int, std::string>>& series) {
    out << "set title '" << title << "'\n";
    out << "set xlabel 't [s]'; set ylabel '" << ylabel << "'\n";
    out << "plot ";
    bool first = true;
    for (const auto& file : csv_files) {
      for (const auto& [col, name] : series) {
        if (!first) out << ", \\\n     ";
        out << "'" << file << "' using 1:" << col << " with lines title '" << name
            << " (" << file << ")'";
        first = false;
      }
    }
    out << "\npause -1\n\n";
  };
  const auto col = [](const std::string& name) {
    for (size_t i = 0; i < kTraceColumns.size(); ++i)
      if (kTraceColumns[i] == name) return static_cast<int>(i) + 1;
    return 0;
  };
  panel("Spacecraft angular velocity", "omega_b [rad/s]", {{col("omega_b"), "omega_b"}});
  panel("Spacecraft attitude", "theta_b [rad]", {{col("theta_b"), "theta_b"}});
  panel("End-effector tracking errors", "dx [m]",
        {{col("dx_1"), "dx_1"}, {col("dx_2"), "dx_2"}});
  {
    std::vector<std::pair<int, std::string>> series;
    for (int i = 1; i <= 10; ++i)
      series.push_back({col("a_d_hat_" + std::to_string(i)), "a_d_hat_" + std::to_string(i)});
    panel("Dynamic parameter estimates", "a_d_hat", series);
  }
  panel("Initial angular momentum estimate", "p0_hat [kg m^2/s]",
        {{col("a_d_hat_11"), "p0_hat"}});
  {
    std::vector<std::pair<int, std::string>> series;
    for (int i = 1; i <= 4; ++i)
      series.push_back({col("a_k_hat_" + std::to_string(i)), "a_k_hat_" + std::to_string(i)});
    panel("Kinematic parameter estimates", "a_k_hat", series);
  }
  panel("CM velocity estimate", "v0_hat [m/s]",
        {{col("a_k_hat_5"), "v0_hat_1"}, {col("a_k_hat_6"), "v0_hat_2"}});
  panel("Base inertia estimate", "Hb_hat [kg m^2]", {{col("Hb_hat"), "Hb_hat"}});
}

}  // namespace ffsm
