#include "mixsde/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mixsde/errors.hpp"

namespace mixsde {
namespace {

std::ofstream open_out(const std::string& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ResourceError("cannot open '" + file + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& file) {
  out.flush();
  if (!out) throw ResourceError("write to '" + file + "' failed");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_path_csv(const std::string& file, const NoisePath& path) {
  auto out = open_out(file);
  out << "t,value\n";
  for (std::size_t k = 0; k < path.grid.size(); ++k) {
    out << format_double(path.grid.node(k)) << ','
        << format_double(path.values[static_cast<Eigen::Index>(k)]) << '\n';
  }
  finish(out, file);
}

void write_pair_csv(const std::string& file, const NoisePair& pair) {
  auto out = open_out(file);
  out << "t,w,bh\n";
  const TimeGrid& g = pair.grid();
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    out << format_double(g.node(k)) << ',' << format_double(pair.w.values[i]) << ','
        << format_double(pair.bh.values[i]) << '\n';
  }
  finish(out, file);
}

void write_solution_csv(const std::string& file, const TimeGrid& grid,
                        const Eigen::VectorXd& values) {
  if (values.size() != static_cast<Eigen::Index>(grid.size())) {
    throw DomainError("write_solution_csv: value count does not match the grid");
  }
  auto out = open_out(file);
  out << "t,x\n";
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out << format_double(grid.node(k)) << ','
        << format_double(values[static_cast<Eigen::Index>(k)]) << '\n';
  }
  finish(out, file);
}

const Eigen::VectorXd& CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return columns[i];
  }
  throw DomainError("csv: no column named '" + name + "'");
}

CsvTable read_csv(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DomainError("cannot open '" + file + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw DomainError("csv '" + file + "' is empty");
  table.header = split(line);
  std::vector<std::vector<double>> cols(table.header.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != table.header.size()) {
      throw DomainError("csv '" + file + "' row " + std::to_string(row) + ": expected " +
                        std::to_string(table.header.size()) + " fields");
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = 0.0;
      const std::string& f = fields[c];
      const auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || end != f.data() + f.size()) {
        throw DomainError("csv '" + file + "' row " + std::to_string(row) + ": '" + f +
                          "' is not a number");
      }
      cols[c].push_back(v);
    }
  }
  for (auto& c : cols) {
    table.columns.push_back(Eigen::Map<const Eigen::VectorXd>(c.data(),
                                                              static_cast<Eigen::Index>(c.size())));
  }
  return table;
}

}  // namespace mixsde
