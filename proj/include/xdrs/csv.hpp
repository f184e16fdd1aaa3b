#pragma once

// Minimal RFC-4180 CSV writer: UTF-8, CRLF row terminators, header row,
// floats at 17 significant digits so round-trips are bit-exact.

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "xdrs/errors.hpp"

namespace xdrs {

inline std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_optional(const std::optional<double>& v) {
  return v ? csv_double(*v) : std::string();
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path)
      : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot open output file: " + path);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << quote(cells[i]);
    }
    out_ << "\r\n";
  }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    q += '"';
    return q;
  }
  std::ofstream out_;
};

}  // namespace xdrs
