#include "levyip/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>

namespace levyip {

namespace le {
namespace {

template <typename T>
void put(std::ostream& os, T v) {
  std::array<unsigned char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes{};
  is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!is) throw IoError("truncated binary stream");
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  T v;
  std::memcpy(&v, bytes.data(), sizeof(T));
  return v;
}

}  // namespace

void write_i32(std::ostream& os, std::int32_t v) { put(os, v); }
void write_u64(std::ostream& os, std::uint64_t v) { put(os, v); }
void write_f64(std::ostream& os, double v) { put(os, v); }
std::int32_t read_i32(std::istream& is) { return get<std::int32_t>(is); }
std::uint64_t read_u64(std::istream& is) { return get<std::uint64_t>(is); }
double read_f64(std::istream& is) { return get<double>(is); }

}  // namespace le

void write_field(std::ostream& os, const Field& f) {
  const Grid& g = f.grid();
  le::write_i32(os, g.dim);
  le::write_i32(os, g.n);
  le::write_f64(os, g.box_len);
  le::write_i32(os, f.components());
  const auto& v = f.values();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index c = 0; c < v.cols(); ++c) le::write_f64(os, v(i, c));
  }
}

Field read_field(std::istream& is) {
  Grid g;
  g.dim = le::read_i32(is);
  g.n = le::read_i32(is);
  g.box_len = le::read_f64(is);
  const int comps = le::read_i32(is);
  try {
    g.validate();
  } catch (const ConfigError& e) {
    throw IoError(std::string("corrupt field header: ") + e.what());
  }
  if (comps < 1 || comps > 8) throw IoError("corrupt field header: bad component count");
  Field f(g, comps);
  auto& v = f.values();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index c = 0; c < v.cols(); ++c) v(i, c) = le::read_f64(is);
  }
  return f;
}

void save_field(const std::string& path, const Field& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_field(os, f);
  if (!os) throw IoError("write failed for '" + path + "'");
}

Field load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  return read_field(is);
}

void save_field_csv(const std::string& path, const Field& f) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  const Grid& g = f.grid();
  for (int a = 0; a < g.dim; ++a) os << (a ? "," : "") << 'x' << a;
  for (int c = 0; c < f.components(); ++c) os << ",c" << c;
  os << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const Point x = g.node_position(i);
    for (int a = 0; a < g.dim; ++a) os << (a ? "," : "") << x(a);
    for (int c = 0; c < f.components(); ++c) os << ',' << f.values()(static_cast<Eigen::Index>(i), c);
    os << '\n';
  }
  if (!os) throw IoError("write failed for '" + path + "'");
}

}  // namespace levyip
