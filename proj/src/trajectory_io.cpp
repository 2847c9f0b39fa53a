#include "geoflow/trajectory_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace geoflow {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string trajectory_to_csv(const Trajectory& traj, const HermitianBasis& basis,
                              BasisConvention convention, double rank_tol,
                              double state_tol) {
  const int m = basis.coord_count();
  std::ostringstream out;
  out << "tau";
  for (int j = 1; j <= m; ++j) out << ",x_" << j;
  out << ",purity,rank,min_eig\n";
  for (size_t i = 0; i < traj.times.size(); ++i) {
    const RVector& x = traj.points[i];
    const StateDiagnostics diag =
        diagnostics(CoherencePoint(traj.n, x), basis, rank_tol, state_tol);
    const RVector x_out =
        convention == BasisConvention::kPauli ? orthonormal_to_pauli(x) : x;
    out << format_double(traj.times[i]);
    for (int j = 0; j < m; ++j) out << ',' << format_double(x_out(j));
    out << ',' << format_double(diag.purity) << ',' << diag.rank << ','
        << format_double(diag.min_eigenvalue) << '\n';
  }
  return out.str();
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const HermitianBasis& basis, BasisConvention convention,
                          double rank_tol, double state_tol) {
  atomic_write_file(path,
                    trajectory_to_csv(traj, basis, convention, rank_tol, state_tol));
}

TrajectoryTable parse_trajectory_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("trajectory csv: empty input");
  // header: tau,x_1,...,x_m,purity,rank,min_eig
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 5 || header.front() != "tau" ||
      header[header.size() - 3] != "purity" || header[header.size() - 2] != "rank" ||
      header.back() != "min_eig")
    throw ParseError("trajectory csv: unexpected header");
  TrajectoryTable table;
  table.coord_count = static_cast<int>(header.size()) - 4;
  for (int j = 0; j < table.coord_count; ++j)
    if (header[static_cast<size_t>(j) + 1] != "x_" + std::to_string(j + 1))
      throw ParseError("trajectory csv: unexpected coordinate column name");
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("trajectory csv: bad number at line " +
                         std::to_string(lineno));
      }
    }
    if (static_cast<int>(row.size()) != table.coord_count + 4)
      throw ParseError("trajectory csv: wrong column count at line " +
                       std::to_string(lineno));
    table.tau.push_back(row[0]);
    RVector x(table.coord_count);
    for (int j = 0; j < table.coord_count; ++j) x(j) = row[static_cast<size_t>(j) + 1];
    table.x.push_back(std::move(x));
    table.purity.push_back(row[static_cast<size_t>(table.coord_count) + 1]);
    table.rank.push_back(static_cast<int>(row[static_cast<size_t>(table.coord_count) + 2]));
    table.min_eig.push_back(row[static_cast<size_t>(table.coord_count) + 3]);
  }
  if (table.tau.empty()) throw ParseError("trajectory csv: no data rows");
  return table;
}

TrajectoryTable read_trajectory_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("trajectory csv not found: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trajectory_csv(buf.str());
}

}  // namespace geoflow
