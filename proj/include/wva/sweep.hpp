#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "wva/closed_forms.hpp"
#include "wva/grid.hpp"

namespace wva {

/// Parses a number or a rational multiple of pi: `pi`, `-pi/2`, `3pi/4`,
/// `2*pi`, `0.5`. Throws ErrorKind::Config on anything else.
double parse_angle(const std::string& text);

/// %.17g, or the literal `degenerate` for NaN and infinities.
std::string format_csv_value(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string to_string() const;
  /// Throws ErrorKind::Io when the file cannot be written.
  void write(const std::filesystem::path& path) const;
};

/// Builds the protocol configuration at a sweep point. `theta` is relative
/// to t*delta_b; `gamma` means Xi = exp(-gamma t) and excludes `xi`.
ProtocolConfig config_at(const GridPoint& p);

/// Quantities a sweep can emit, e.g. "q", "h_d", "q_h_wva", "ratio_direct",
/// "h_wva_over_h_d", "h_d_over_h_wva", "weighted_h_perp", "h_total".
const std::vector<std::string>& sweep_quantities();

/// One row per grid point (axis columns, then quantities) in row-major
/// order regardless of `threads`.
CsvTable run_sweep(const SweepGrid& grid, const std::vector<std::string>& quantities, unsigned threads = 1);

struct FigureOptions {
  int steps = 101;  // per axis
  double xi = 1.0;
  double time = 1.0;
  std::vector<double> xi_list{1.0, 0.999, 0.99, 0.9, 0.5};
  double strength = 0.02;        // fig4
  double t_max = 5.0;            // fig4
  double gamma_max = 2.0;        // fig4
  unsigned threads = 1;
};

struct FigureFile {
  std::string file_name;
  CsvTable table;
};

/// fig2: four G x theta grids; fig3: ratio vs G per Xi; fig4: H_d and
/// q H_wva over t x gamma at the starred point; fig5: the three Xi = 1
/// information panels.
std::vector<FigureFile> make_figure(const std::string& name, const FigureOptions& options = {});
void write_figure(const std::vector<FigureFile>& files, const std::filesystem::path& out_dir);

/// Closed forms, brute-force values and their deviations for one point.
/// The report block uses the paired control angle; `h_anc` and the
/// general meter state use cfg.control_angle as given.
nlohmann::ordered_json point_report(const ProtocolConfig& cfg);

}  // namespace wva
