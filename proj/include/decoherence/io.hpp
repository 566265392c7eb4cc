#pragma once

// Locale-independent number formatting, CSV tables and atomic file writes.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace decoherence::io {

/// Scientific notation with 17 significant digits (exact round trip).
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 16);
  if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("parse_double: '" + s + "'");
  return v;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  /// Cells are preformatted strings; use cell() for numbers.
  void add_row(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw std::invalid_argument("CsvTable: row width differs from header");
    rows_.push_back(std::move(row));
  }

  static std::string cell(double v) { return format_double(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }

  std::string str() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes to a sibling temporary file and renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << contents;
    f.flush();
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(f), {});
}

}  // namespace decoherence::io
