#pragma once

// ============================================================================
// snapshot_io.hpp -- flat binary scalar-field dumps and run metadata
//
// One file per scalar field.  Layout (little-endian, packed, 32 bytes of
// header then N^dim doubles in row-major order):
//
//   offset  size  field
//   0       8     magic "NLDWFLD\0"
//   8       4     uint32 dim
//   12      4     uint32 N          (points per axis)
//   16      8     double L          (half-width of the periodic box)
//   24      8     double t          (simulation time of the snapshot)
//
// A snapshot directory holds u_######.bin / v_######.bin pairs indexed in
// store order plus a run.meta key=value file carrying everything needed to
// re-derive the problem (damping exponent, p, epsilon, data shape, stride);
// values are written with "%.17g" so they reload bit-exactly.
// ============================================================================

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "nldw/csv.hpp"
#include "nldw/errors.hpp"
#include "nldw/grid.hpp"
#include "nldw/solver.hpp"

namespace nldw {

inline constexpr char kFieldMagic[8] = {'N', 'L', 'D', 'W',
                                        'F', 'L', 'D', '\0'};

inline std::string format_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

inline void write_field_binary(const std::filesystem::path& path,
                               const Field& f, double t) {
  std::string bytes;
  bytes.reserve(32 + f.values.size() * sizeof(double));
  bytes.append(kFieldMagic, 8);
  const std::uint32_t dim = static_cast<std::uint32_t>(f.grid.dim);
  const std::uint32_t n = static_cast<std::uint32_t>(f.grid.points);
  const double L = f.grid.half_width;
  bytes.append(reinterpret_cast<const char*>(&dim), 4);
  bytes.append(reinterpret_cast<const char*>(&n), 4);
  bytes.append(reinterpret_cast<const char*>(&L), 8);
  bytes.append(reinterpret_cast<const char*>(&t), 8);
  bytes.append(reinterpret_cast<const char*>(f.values.data()),
               f.values.size() * sizeof(double));
  write_file_atomic(path, bytes);
}

/// Read one field dump; returns the field and fills `t_out`.
inline Field read_field_binary(const std::filesystem::path& path,
                               double& t_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput("cannot open snapshot file: " + path.string());
  char magic[8];
  std::uint32_t dim = 0, n = 0;
  double L = 0.0, t = 0.0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&dim), 4);
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&L), 8);
  in.read(reinterpret_cast<char*>(&t), 8);
  if (!in || std::memcmp(magic, kFieldMagic, 8) != 0) {
    throw Error("not a field dump (bad magic): " + path.string());
  }
  if (dim != 1 && dim != 2) {
    throw Error("field dump has unsupported dim: " + path.string());
  }
  Grid g(static_cast<int>(dim), L, n);
  Field f = Field::zeros(g);
  in.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!in) throw Error("truncated field dump: " + path.string());
  t_out = t;
  return f;
}

using RunMeta = std::map<std::string, std::string>;

inline void write_run_meta(const std::filesystem::path& path,
                           const RunMeta& meta) {
  std::string out;
  for (const auto& [k, v] : meta) {  // std::map: deterministic key order
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  write_file_atomic(path, out);
}

inline RunMeta read_run_meta(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInput("cannot open run metadata: " + path.string());
  RunMeta meta;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) continue;
    meta[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return meta;
}

inline std::string snapshot_file_name(char which, std::size_t index) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%c_%06zu.bin", which, index);
  return std::string(buf);
}

/// Dump every store entry as u_/v_ pairs plus run.meta into `dir`.
inline void write_snapshot_dir(const std::filesystem::path& dir,
                               const SnapshotStore& store,
                               const RunMeta& meta) {
  std::filesystem::create_directories(dir);
  const auto& entries = store.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    write_field_binary(dir / snapshot_file_name('u', i), entries[i].u,
                       entries[i].t);
    write_field_binary(dir / snapshot_file_name('v', i), entries[i].v,
                       entries[i].t);
  }
  RunMeta full = meta;
  full["count"] = std::to_string(entries.size());
  write_run_meta(dir / "run.meta", full);
}

/// Load a snapshot directory written by write_snapshot_dir.
inline SnapshotStore read_snapshot_dir(const std::filesystem::path& dir,
                                       RunMeta& meta_out) {
  if (!std::filesystem::is_directory(dir)) {
    throw MissingInput("snapshot directory not found: " + dir.string());
  }
  meta_out = read_run_meta(dir / "run.meta");
  const auto it = meta_out.find("count");
  if (it == meta_out.end()) {
    throw Error("run.meta lacks a count entry: " + dir.string());
  }
  const std::size_t count = std::stoul(it->second);
  int stride = 8;
  if (auto s = meta_out.find("stride"); s != meta_out.end()) {
    stride = std::stoi(s->second);
  }
  SnapshotStore store(SnapshotStore::Mode::Full, stride);
  for (std::size_t i = 0; i < count; ++i) {
    double tu = 0.0, tv = 0.0;
    Field u = read_field_binary(dir / snapshot_file_name('u', i), tu);
    Field v = read_field_binary(dir / snapshot_file_name('v', i), tv);
    require_same_grid(u, v, "read_snapshot_dir");
    if (tu != tv) {
      throw Error("u/v snapshot times disagree at index " +
                  std::to_string(i));
    }
    SimState s;
    s.t = tu;
    s.u = std::move(u);
    s.v = std::move(v);
    s.steps = 0;
    s.dt = 0.0;
    store.push(s);
  }
  return store;
}

}  // namespace nldw
