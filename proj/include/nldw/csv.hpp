#pragma once

// ============================================================================
// csv.hpp -- deterministic CSV emission and atomic file writes
//
// All experiment artifacts route through this header so that identical
// inputs produce bitwise-identical bytes: numbers are formatted with a fixed
// "%.12g" snprintf conversion (locale-independent, shortest-ish round-trip
// for the tolerances used here), rows are written in a fixed order, and
// files land via a .partial staging name renamed into place only on success.
// A failed stage therefore leaves its partial artifact behind for
// inspection instead of a truncated final file.
// ============================================================================

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nldw/errors.hpp"

namespace nldw {

/// Fixed numeric formatting for every CSV/SVG artifact.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::string(buf);
}

/// FNV-1a 64-bit hash; used to fingerprint configuration text in manifests.
inline std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;  // FNV offset basis
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;  // FNV prime
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

/// Write `content` to `path` atomically: stage to "<path>.partial", then
/// rename.  The staging file persists if anything throws before the rename.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  const std::filesystem::path partial = path.string() + ".partial";
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw MissingInput("cannot open for writing: " + partial.string());
    }
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      throw Error("short write to " + partial.string());
    }
  }
  std::filesystem::rename(partial, path);
}

/// Row-oriented CSV assembler.  Every table begins with a header row; cells
/// are either preformatted strings or doubles run through format_number.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header)
      : header_(std::move(header)) {}

  class RowBuilder {
   public:
    explicit RowBuilder(CsvTable& table) : table_(table) {}
    RowBuilder& num(double v) {
      cells_.push_back(format_number(v));
      return *this;
    }
    RowBuilder& text(std::string s) {
      cells_.push_back(std::move(s));
      return *this;
    }
    ~RowBuilder() { table_.rows_.push_back(std::move(cells_)); }

    RowBuilder(const RowBuilder&) = delete;
    RowBuilder& operator=(const RowBuilder&) = delete;

   private:
    CsvTable& table_;
    std::vector<std::string> cells_;
  };

  RowBuilder row() { return RowBuilder(*this); }

  /// Footer lines are appended verbatim after the data rows (used for the
  /// fit block under ODE sweep tables).
  void footer_line(std::string line) { footers_.push_back(std::move(line)); }

  std::string to_string() const {
    std::string out = join(header_);
    out += '\n';
    for (const auto& r : rows_) {
      out += join(r);
      out += '\n';
    }
    for (const auto& f : footers_) {
      out += f;
      out += '\n';
    }
    return out;
  }

  void write(const std::filesystem::path& path) const {
    write_file_atomic(path, to_string());
  }

  std::size_t n_rows() const { return rows_.size(); }

 private:
  static std::string join(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    return out;
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::string> footers_;
};

}  // namespace nldw
