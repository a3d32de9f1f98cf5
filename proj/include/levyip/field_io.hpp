#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "levyip/spectral.hpp"

namespace levyip {

// Little-endian primitives shared by the field and checkpoint formats.
namespace le {
void write_i32(std::ostream& os, std::int32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_f64(std::ostream& os, double v);
std::int32_t read_i32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
double read_f64(std::istream& is);
}  // namespace le

/// Binary field layout:
///   int32 dim | int32 n | float64 box_len | int32 components |
///   float64 samples[node][component], nodes in row-major order.
/// All values little-endian.
void write_field(std::ostream& os, const Field& f);
Field read_field(std::istream& is);

void save_field(const std::string& path, const Field& f);
Field load_field(const std::string& path);

/// CSV with columns x0[,x1],c0[,c1] for plotting.
void save_field_csv(const std::string& path, const Field& f);

}  // namespace levyip
