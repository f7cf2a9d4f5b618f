#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "stefanlab/errors.hpp"
#include "stefanlab/util.hpp"

namespace stefan {

/// Uniform-spacing scalar grid at a single time.  Values are row-major with
/// the last axis fastest; axis a covers origin[a] + h * {0 .. dims[a]-1}.
struct ScalarField {
  std::vector<std::int64_t> dims;
  double h = 1.0;
  std::vector<double> origin;
  double t = 0.0;
  std::vector<double> values;

  ScalarField() = default;
  ScalarField(std::vector<std::int64_t> dims_, double h_, std::vector<double> origin_,
              double t_)
      : dims(std::move(dims_)), h(h_), origin(std::move(origin_)), t(t_) {
    validate_header();
    values.assign(static_cast<std::size_t>(size()), 0.0);
  }

  int rank() const { return static_cast<int>(dims.size()); }

  std::int64_t size() const {
    std::int64_t n = 1;
    for (std::int64_t d : dims) n *= d;
    return n;
  }

  void validate_header() const {
    require_input(!dims.empty() && dims.size() <= 4, "ScalarField: rank must be 1..4");
    require_input(origin.size() == dims.size(), "ScalarField: origin rank mismatch");
    require_input(h > 0.0 && std::isfinite(h), "ScalarField: spacing must be positive");
    std::int64_t n = 1;
    for (std::int64_t d : dims) {
      require_input(d >= 1, "ScalarField: axis sizes must be positive");
      require_input(n <= (std::int64_t{1} << 33) / d, "ScalarField: grid too large");
      n *= d;
    }
  }

  double coord(int axis, std::int64_t idx) const { return origin[axis] + h * idx; }

  double& at(std::int64_t i) { return values[static_cast<std::size_t>(i)]; }
  double at(std::int64_t i) const { return values[static_cast<std::size_t>(i)]; }

  double& at(std::int64_t i, std::int64_t j) {
    return values[static_cast<std::size_t>(i * dims[1] + j)];
  }
  double at(std::int64_t i, std::int64_t j) const {
    return values[static_cast<std::size_t>(i * dims[1] + j)];
  }

  /// Linear (rank 1) or bilinear (rank 2) interpolation, with the query
  /// point clamped into the grid box.
  double sample(const std::vector<double>& x) const {
    require_input(static_cast<int>(x.size()) == rank(), "ScalarField: sample rank mismatch");
    require_input(rank() <= 2, "ScalarField: sampling implemented for rank 1 and 2");
    auto locate = [&](int axis, double& frac) -> std::int64_t {
      double u = (x[axis] - origin[axis]) / h;
      u = std::min(std::max(u, 0.0), static_cast<double>(dims[axis] - 1));
      std::int64_t i0 = static_cast<std::int64_t>(std::floor(u));
      if (i0 >= dims[axis] - 1) i0 = dims[axis] - 2;
      if (i0 < 0) i0 = 0;
      frac = dims[axis] == 1 ? 0.0 : u - i0;
      return i0;
    };
    if (rank() == 1) {
      if (dims[0] == 1) return values[0];
      double f = 0.0;
      std::int64_t i0 = locate(0, f);
      return (1.0 - f) * at(i0) + f * at(i0 + 1);
    }
    require_input(dims[0] >= 2 && dims[1] >= 2, "ScalarField: bilinear needs 2x2 grid");
    double fx = 0.0, fy = 0.0;
    std::int64_t i0 = locate(0, fx);
    std::int64_t j0 = locate(1, fy);
    return (1.0 - fx) * ((1.0 - fy) * at(i0, j0) + fy * at(i0, j0 + 1)) +
           fx * ((1.0 - fy) * at(i0 + 1, j0) + fy * at(i0 + 1, j0 + 1));
  }
};

namespace detail {

inline void put_u64le(std::ostream& os, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(buf, 8);
}

inline std::uint64_t get_u64le(std::istream& is) {
  char buf[8];
  is.read(buf, 8);
  require_input(static_cast<bool>(is), "ScalarField: truncated binary stream");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

inline void put_f64le(std::ostream& os, double v) {
  put_u64le(os, std::bit_cast<std::uint64_t>(v));
}

inline double get_f64le(std::istream& is) {
  return std::bit_cast<double>(get_u64le(is));
}

} // namespace detail

/// Binary layout, all fields little-endian 64-bit:
///   [i64 rank] [i64 dims[rank]] [f64 h] [f64 origin[rank]] [f64 t]
///   [f64 values, row-major, last axis fastest]
inline void write_field_binary(const ScalarField& f, std::ostream& os) {
  f.validate_header();
  require_input(f.values.size() == static_cast<std::size_t>(f.size()),
                "ScalarField: value count mismatch");
  detail::put_u64le(os, static_cast<std::uint64_t>(f.rank()));
  for (std::int64_t d : f.dims) detail::put_u64le(os, static_cast<std::uint64_t>(d));
  detail::put_f64le(os, f.h);
  for (double c : f.origin) detail::put_f64le(os, c);
  detail::put_f64le(os, f.t);
  for (double v : f.values) detail::put_f64le(os, v);
  require_input(static_cast<bool>(os), "ScalarField: write failed");
}

inline void write_field_binary(const ScalarField& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  require_input(static_cast<bool>(os), "ScalarField: cannot open " + path);
  write_field_binary(f, os);
}

inline ScalarField read_field_binary(std::istream& is) {
  ScalarField f;
  const std::uint64_t rank = detail::get_u64le(is);
  require_input(rank >= 1 && rank <= 4, "ScalarField: bad rank in stream");
  f.dims.resize(rank);
  for (auto& d : f.dims) d = static_cast<std::int64_t>(detail::get_u64le(is));
  f.h = detail::get_f64le(is);
  f.origin.resize(rank);
  for (auto& c : f.origin) c = detail::get_f64le(is);
  f.t = detail::get_f64le(is);
  f.validate_header();
  f.values.resize(static_cast<std::size_t>(f.size()));
  for (auto& v : f.values) v = detail::get_f64le(is);
  return f;
}

inline ScalarField read_field_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require_input(static_cast<bool>(is), "ScalarField: cannot open " + path);
  return read_field_binary(is);
}

/// CSV with one row per grid node: coordinate columns x0..x{rank-1}, then the
/// value, all printed with 17 significant digits.
inline void write_field_csv(const ScalarField& f, std::ostream& os) {
  f.validate_header();
  for (int a = 0; a < f.rank(); ++a) os << "x" << a << ",";
  os << "value\n";
  std::vector<std::int64_t> idx(f.dims.size(), 0);
  for (std::int64_t flat = 0; flat < f.size(); ++flat) {
    for (int a = 0; a < f.rank(); ++a) os << format17(f.coord(a, idx[a])) << ",";
    os << format17(f.values[static_cast<std::size_t>(flat)]) << "\n";
    for (int a = f.rank() - 1; a >= 0; --a) {
      if (++idx[a] < f.dims[a]) break;
      idx[a] = 0;
    }
  }
  require_input(static_cast<bool>(os), "ScalarField: CSV write failed");
}

inline void write_field_csv(const ScalarField& f, const std::string& path) {
  std::ofstream os(path);
  require_input(static_cast<bool>(os), "ScalarField: cannot open " + path);
  write_field_csv(f, os);
}

} // namespace stefan
