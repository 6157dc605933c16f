#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fpfv/fields.hpp"
#include "fpfv/mesh.hpp"

namespace fpfv {

/// Scientific notation with 17 significant digits (round-trip exact).
std::string format_sci(double v);

struct SeriesRow {
  double t = 0.0;
  double energy = 0.0;
  double entropy = 0.0;
  double d_psi = 0.0;
  double r_psi = 0.0;
  double delta = 0.0;
  double mass = 0.0;
  double rho_min = 0.0;
  int newton_iters = 0;
};

void write_series_csv(const std::string& path, const std::vector<SeriesRow>& rows);

struct TableRow {
  double tau = 0.0;
  double size = 0.0;
  double l1 = 0.0;
  double l1_rate = 0.0;  // NaN on the first row (left empty in the file)
  double l2 = 0.0;
  double l2_rate = 0.0;
  double linf = 0.0;
  double linf_rate = 0.0;
  double rho_min = 0.0;
};

void write_table_csv(const std::string& path, const std::vector<TableRow>& rows);
std::vector<TableRow> read_table_csv(const std::string& path);

/// VTK legacy ASCII unstructured grid with one CELL_DATA scalar per field.
void write_vtk_snapshot(const std::string& path, const Mesh& mesh,
                        const std::vector<std::pair<std::string, const CellField*>>& fields);

/// Line-oriented `key = value` configuration; blank lines and lines starting
/// with '#' are skipped, malformed lines are errors.
std::map<std::string, std::string> parse_config_file(const std::string& path);
std::map<std::string, std::string> parse_config(std::istream& in);

}  // namespace fpfv
