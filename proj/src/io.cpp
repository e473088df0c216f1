#include "sds/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace sds {
namespace {

static_assert(std::endian::native == std::endian::little, "binary layout assumes little-endian");

constexpr char kMagic[8] = {'S', 'D', 'S', 'B', 'I', 'N', '0', '1'};

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void put_array(std::ostream& out, const std::vector<T>& v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
bool get(std::istream& in, T& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

template <class T>
void get_array(std::istream& in, std::vector<T>& v, std::uint64_t n) {
  v.resize(n);
  if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T))))
    throw std::runtime_error("binary trajectories: truncated block");
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

CsvTrajectoryWriter::CsvTrajectoryWriter(std::ostream& out) : out_(out) {
  out_ << "replica,n,x_index,value,log_product\n";
}

void CsvTrajectoryWriter::write(const TrajectoryBundle& bundle) {
  const std::string replica = std::to_string(bundle.replica);
  for (std::size_t k = 0; k < bundle.size(); ++k) {
    const std::string n = std::to_string(bundle.steps[k]);
    const std::string s = format_double(bundle.log_product[k]);
    for (std::size_t i = 0; i < bundle.paths.size(); ++i)
      out_ << replica << ',' << n << ',' << i << ',' << format_double(bundle.paths[i][k]) << ',' << s << '\n';
  }
}

BinaryTrajectoryWriter::BinaryTrajectoryWriter(std::ostream& out,
                                               const std::vector<double>& starting_points)
    : out_(out), n_start_(starting_points.size()) {
  out_.write(kMagic, sizeof kMagic);
  put(out_, static_cast<std::uint64_t>(n_start_));
  put_array(out_, starting_points);
}

void BinaryTrajectoryWriter::write(const TrajectoryBundle& bundle) {
  if (bundle.paths.size() != n_start_)
    throw std::invalid_argument("binary trajectories: starting point count mismatch");
  put(out_, bundle.replica);
  put(out_, static_cast<std::uint64_t>(bundle.size()));
  put_array(out_, bundle.steps);
  put_array(out_, bundle.log_product);
  for (const auto& p : bundle.paths) put_array(out_, p);
}

BinaryTrajectories read_binary_trajectories(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("binary trajectories: bad magic");
  BinaryTrajectories out;
  std::uint64_t n_start = 0;
  if (!get(in, n_start)) throw std::runtime_error("binary trajectories: truncated header");
  get_array(in, out.starting_points, n_start);
  std::uint64_t replica;
  while (get(in, replica)) {
    BinaryBlock b;
    b.replica = replica;
    std::uint64_t rows = 0;
    if (!get(in, rows)) throw std::runtime_error("binary trajectories: truncated block");
    get_array(in, b.steps, rows);
    get_array(in, b.log_product, rows);
    b.values.resize(n_start);
    for (auto& v : b.values) get_array(in, v, rows);
    out.blocks.push_back(std::move(b));
  }
  return out;
}

}  // namespace sds
