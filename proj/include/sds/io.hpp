#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sds/engine.hpp"

namespace sds {

/// Shortest round-trip decimal ("%.17g"); "inf", "-inf", "nan" otherwise.
std::string format_double(double v);

/// Writes the whole file or throws std::runtime_error naming the path.
void write_text_file(const std::string& path, const std::string& content);

/// Long-format trajectory CSV, one row per recorded step and starting point:
///   replica,n,x_index,value,log_product
class CsvTrajectoryWriter {
 public:
  explicit CsvTrajectoryWriter(std::ostream& out);
  void write(const TrajectoryBundle& bundle);

 private:
  std::ostream& out_;
};

/// Columnar little-endian dump.
///   header: "SDSBIN01" | u64 n_start | f64 starting_points[n_start]
///   block per replica: u64 replica | u64 rows | u64 steps[rows]
///                      | f64 log_product[rows] | f64 values[n_start][rows]
class BinaryTrajectoryWriter {
 public:
  BinaryTrajectoryWriter(std::ostream& out, const std::vector<double>& starting_points);
  void write(const TrajectoryBundle& bundle);

 private:
  std::ostream& out_;
  std::size_t n_start_;
};

struct BinaryBlock {
  std::uint64_t replica = 0;
  std::vector<std::uint64_t> steps;
  std::vector<double> log_product;
  std::vector<std::vector<double>> values;  ///< values[i][k]
};

struct BinaryTrajectories {
  std::vector<double> starting_points;
  std::vector<BinaryBlock> blocks;
};

/// Reads a dump written by BinaryTrajectoryWriter; throws std::runtime_error
/// on a bad magic or a truncated block.
BinaryTrajectories read_binary_trajectories(std::istream& in);

}  // namespace sds
