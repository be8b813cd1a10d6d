#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixsde/fbm.hpp"
#include "mixsde/grid.hpp"

namespace mixsde {

/// %.17g: round-trips every finite double.
std::string format_double(double v);

/// `t,value`, one row per node.
void write_path_csv(const std::string& file, const NoisePath& path);
/// `t,w,bh`
void write_pair_csv(const std::string& file, const NoisePair& pair);
/// `t,x`
void write_solution_csv(const std::string& file, const TimeGrid& grid,
                        const Eigen::VectorXd& values);

/// Numeric table with a mandatory header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<Eigen::VectorXd> columns;

  /// Column by header name; throws DomainError if absent.
  const Eigen::VectorXd& column(const std::string& name) const;
};

/// Reads a comma-separated numeric file.  Throws DomainError on ragged
/// rows or fields that are not numbers.
CsvTable read_csv(const std::string& file);

}  // namespace mixsde
