#pragma once

// CSV and plot-script emission. Numbers are printed with %.17g so that files
// round-trip exactly and identical runs give identical bytes.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "kslab/diagnostics.hpp"

namespace kslab {

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Column label for an exponent: 2 -> "2", 2.5 -> "2.5".
inline std::string format_exponent(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

inline std::string series_header(const std::vector<double>& p_list) {
  std::string h = "t,dt,max_u,l1";
  for (double p : p_list) h += ",lp_" + format_exponent(p);
  for (double p : p_list) h += ",psi_" + format_exponent(p);
  h += ",mass_mean,y_ab,monotone_violation";
  return h;
}

inline std::string series_line(const DiagnosticsRow& row) {
  std::string s = format_number(row.t) + "," + format_number(row.dt) + "," + format_number(row.max_u) +
                  "," + format_number(row.l1);
  for (double x : row.lp) s += "," + format_number(x);
  for (double x : row.psi) s += "," + format_number(x);
  s += "," + format_number(row.mass_mean) + "," + format_number(row.y_ab) + "," +
       format_number(row.monotone_violation);
  return s;
}

/// Streams rows of a diagnostics series to a CSV file as they are produced.
class SeriesWriter {
 public:
  SeriesWriter(const std::string& path, const std::vector<double>& p_list) : out_(path) {
    if (!out_) throw Error(ErrorCode::ConfigError, "cannot write " + path);
    out_ << series_header(p_list) << '\n';
  }

  void write(const DiagnosticsRow& row) { out_ << series_line(row) << '\n'; }

  /// Marker appended when a run is cut short by an error.
  void truncate(const std::string& reason) {
    std::string clean = reason;
    for (char& c : clean) {
      if (c == '\n' || c == ',') c = ' ';
    }
    out_ << "# truncated: " << clean << '\n';
    out_.flush();
  }

  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

inline void write_series(const std::string& path, const DiagnosticsSeries& series) {
  SeriesWriter w(path, series.p_list);
  for (const auto& row : series.rows) w.write(row);
}

/// Gnuplot script for max u and Psi trajectories of a series.csv.
inline std::string plot_script(const std::string& csv, const std::vector<double>& p_list) {
  std::string s;
  s += "set datafile separator ','\n";
  s += "set key autotitle columnhead\n";
  s += "set terminal pngcairo size 1000,700\n";
  s += "set logscale y\n";
  s += "set xlabel 't'\n";
  s += "set output 'max_u.png'\n";
  s += "set ylabel 'max u'\n";
  s += "plot '" + csv + "' using 1:3 with lines\n";
  s += "set output 'psi.png'\n";
  s += "set ylabel 'Psi'\n";
  s += "plot ";
  const std::size_t first_psi = 5 + p_list.size();
  for (std::size_t i = 0; i < p_list.size(); ++i) {
    if (i) s += ", \\\n     ";
    s += "'" + csv + "' using 1:" + std::to_string(first_psi + i) + " with lines";
  }
  s += "\n";
  return s;
}

}  // namespace kslab
