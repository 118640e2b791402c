// Deterministic text/binary output: CSV tables, RPK1 field snapshots, and
// run manifests. Doubles are printed with %.17g so identical runs produce
// byte-identical files.
#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rpk {

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
      : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out_ << ',';
      out_ << columns[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ',';
      out_ << fmt_double(values[i]);
    }
    out_ << '\n';
  }

  void raw_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

// --- RPK1 field snapshots ---------------------------------------------------
//
// Bit-exact snapshot format: one ASCII header line
//   RPK1 d=2 N=<N> L=<L> t=<t>
// followed by N*N little-endian f64 (re, im) pairs, row-major.

static_assert(std::endian::native == std::endian::little,
              "RPK1 snapshots assume a little-endian host");

}  // namespace rpk

#include "rpk/grid.hpp"

namespace rpk {

inline void write_snapshot(const ComplexField& f, double t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "RPK1 d=2 N=" << f.grid.n << " L=" << fmt_double(f.grid.half_width)
      << " t=" << fmt_double(t) << '\n';
  for (const auto& v : f.values) {
    const double re = v.real(), im = v.imag();
    out.write(reinterpret_cast<const char*>(&re), sizeof(double));
    out.write(reinterpret_cast<const char*>(&im), sizeof(double));
  }
  if (!out) throw std::runtime_error("short write to " + path.string());
}

inline ComplexField read_snapshot(const std::filesystem::path& path, double* t_out = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  int n = 0;
  double l = 0.0, t = 0.0;
  if (std::sscanf(header.c_str(), "RPK1 d=2 N=%d L=%lf t=%lf", &n, &l, &t) != 3)
    throw std::runtime_error("not an RPK1 snapshot: " + path.string());
  ComplexField f{Grid(n, l)};
  for (auto& v : f.values) {
    double re, im;
    in.read(reinterpret_cast<char*>(&re), sizeof(double));
    in.read(reinterpret_cast<char*>(&im), sizeof(double));
    v = {re, im};
  }
  if (!in) throw std::runtime_error("truncated RPK1 snapshot: " + path.string());
  if (t_out) *t_out = t;
  return f;
}

/// Ordered key/value manifest. No timestamps: manifests must be reproducible.
inline void write_manifest(const std::filesystem::path& dir,
                           const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out(dir / "manifest.txt", std::ios::binary);
  if (!out) throw std::runtime_error("cannot open manifest in " + dir.string());
  for (const auto& [key, value] : entries) out << key << ": " << value << '\n';
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string());
}

}  // namespace rpk
