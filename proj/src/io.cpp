#include "fpfv/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "fpfv/errors.hpp"

namespace fpfv {

std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

void write_series_csv(const std::string& path, const std::vector<SeriesRow>& rows) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << "t,E,H,D_psi,R_psi,Delta,mass,rho_min,newton_iters\n";
  for (const SeriesRow& r : rows) {
    out << format_sci(r.t) << ',' << format_sci(r.energy) << ',' << format_sci(r.entropy) << ','
        << format_sci(r.d_psi) << ',' << format_sci(r.r_psi) << ',' << format_sci(r.delta) << ','
        << format_sci(r.mass) << ',' << format_sci(r.rho_min) << ',' << r.newton_iters << '\n';
  }
}

void write_table_csv(const std::string& path, const std::vector<TableRow>& rows) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << "tau,size,L1,rate,L2,rate,Linf,rate,rho_min\n";
  auto rate_field = [](double r) { return std::isnan(r) ? std::string() : format_sci(r); };
  for (const TableRow& r : rows) {
    out << format_sci(r.tau) << ',' << format_sci(r.size) << ',' << format_sci(r.l1) << ','
        << rate_field(r.l1_rate) << ',' << format_sci(r.l2) << ',' << rate_field(r.l2_rate) << ','
        << format_sci(r.linf) << ',' << rate_field(r.linf_rate) << ',' << format_sci(r.rho_min)
        << '\n';
  }
}

std::vector<TableRow> read_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open table file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty table file '" + path + "'");
  std::vector<TableRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.push_back("");
    if (fields.size() != 9) throw InputError("bad table row '" + line + "'");
    auto num = [&](size_t i) {
      if (fields[i].empty()) return std::numeric_limits<double>::quiet_NaN();
      return std::stod(fields[i]);
    };
    rows.push_back({num(0), num(1), num(2), num(3), num(4), num(5), num(6), num(7), num(8)});
  }
  return rows;
}

void write_vtk_snapshot(const std::string& path, const Mesh& mesh,
                        const std::vector<std::pair<std::string, const CellField*>>& fields) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << "# vtk DataFile Version 3.0\n";
  out << "fpfv snapshot\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertices.size() << " double\n";
  for (const Vec2& v : mesh.vertices) {
    out << format_sci(v.x) << ' ' << format_sci(v.y) << " 0\n";
  }
  out << "CELLS " << mesh.triangles.size() << ' ' << 4 * mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) {
    out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  out << "CELL_TYPES " << mesh.triangles.size() << '\n';
  for (size_t i = 0; i < mesh.triangles.size(); ++i) out << "5\n";
  out << "CELL_DATA " << mesh.triangles.size() << '\n';
  for (const auto& [name, field] : fields) {
    out << "SCALARS " << name << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (int k = 0; k < field->size(); ++k) out << format_sci((*field)[k]) << '\n';
  }
}

std::map<std::string, std::string> parse_config(std::istream& in) {
  std::map<std::string, std::string> entries;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto from = s.find_first_not_of(" \t\r");
    if (from == std::string::npos) return std::string();
    const auto to = s.find_last_not_of(" \t\r");
    return s.substr(from, to - from + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(lineno) + ": expected 'key = value', got '" +
                       stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw InputError("config line " + std::to_string(lineno) + ": empty key");
    if (!entries.emplace(key, value).second) {
      throw InputError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  return entries;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace fpfv
