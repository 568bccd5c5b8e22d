#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <ostream>
#include <string>
#include <vector>

/// Output artifacts and process conventions.
///
/// Simulation CSVs embed their full run provenance (model parameters, seed,
/// inertia, ...) as '#' header lines plus a hash of that metadata, so a file
/// is self-describing and two files are byte-identical exactly when they came
/// from the same deterministic computation.  Metadata deliberately excludes
/// anything execution-dependent (thread count, wall-clock): the same run at
/// any parallelism must produce the same bytes.
namespace pcaspin::io {

/// Exit codes of the command-line tools.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,        ///< bad flags / flag combinations
  kParseError = 3,   ///< malformed input file or config
  kResourceCap = 4,  ///< exact computation beyond supported size
  kIoError = 5,      ///< filesystem failure
};

/// Minimal JSON string escaping (quotes, backslashes, control characters).
inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out;
}

/// A table cell rendered as a JSON value: finite numeric cells pass through
/// unquoted, everything else (inf, nan, text) becomes a JSON string.
inline std::string json_cell(const std::string& cell) {
  if (!cell.empty()) {
    char* end = nullptr;
    double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() + cell.size() && std::isfinite(v))
      return cell;
  }
  return "\"" + json_escape(cell) + "\"";
}

/// 64-bit FNV-1a hash.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Shortest-round-trip-safe decimal rendering of a double.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf);
}

/// A CSV document with deterministic provenance headers.
///
/// Layout:
///   # pcaspin:<tool>
///   # <key>=<value>           (sorted by key)
///   # provenance_hash=0x<hash of the key=value block>
///   col,col,...
///   data rows
class CsvDocument {
 public:
  explicit CsvDocument(std::string tool) : tool_(std::move(tool)) {}

  void set_meta(const std::string& key, const std::string& value) {
    meta_[key] = value;
  }
  void set_meta(const std::string& key, double value) {
    meta_[key] = format_double(value);
  }
  void set_meta(const std::string& key, std::uint64_t value) {
    meta_[key] = std::to_string(value);
  }
  void set_meta(const std::string& key, std::int64_t value) {
    meta_[key] = std::to_string(value);
  }

  void set_columns(std::vector<std::string> columns) {
    columns_ = std::move(columns);
  }

  void add_row(std::vector<std::string> cells) {
    rows_.push_back(std::move(cells));
  }

  /// The hash embedded in the header: FNV-1a over the sorted key=value block.
  std::uint64_t provenance_hash() const {
    std::string blob = tool_;
    for (const auto& [k, v] : meta_) blob += "\n" + k + "=" + v;
    return fnv1a(blob);
  }

  void write(std::ostream& os) const {
    os << "# pcaspin:" << tool_ << "\n";
    for (const auto& [k, v] : meta_) os << "# " << k << "=" << v << "\n";
    char hash[24];
    std::snprintf(hash, sizeof hash, "0x%016llx",
                  static_cast<unsigned long long>(provenance_hash()));
    os << "# provenance_hash=" << hash << "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i)
      os << (i ? "," : "") << columns_[i];
    os << "\n";
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i)
        os << (i ? "," : "") << row[i];
      os << "\n";
    }
  }

  /// JSON-lines alternative: one meta object, then one object per row with
  /// the columns as keys.  Same provenance, same determinism contract.
  void write_jsonl(std::ostream& os) const {
    char hash[24];
    std::snprintf(hash, sizeof hash, "0x%016llx",
                  static_cast<unsigned long long>(provenance_hash()));
    os << "{\"tool\":\"" << json_escape(tool_) << "\",\"provenance_hash\":\""
       << hash << "\",\"meta\":{";
    bool first = true;
    for (const auto& [k, v] : meta_) {
      os << (first ? "" : ",") << "\"" << json_escape(k) << "\":\""
         << json_escape(v) << "\"";
      first = false;
    }
    os << "}}\n";
    for (const auto& row : rows_) {
      os << "{";
      for (std::size_t i = 0; i < row.size() && i < columns_.size(); ++i)
        os << (i ? "," : "") << "\"" << json_escape(columns_[i])
           << "\":" << json_cell(row[i]);
      os << "}\n";
    }
  }

 private:
  std::string tool_;
  std::map<std::string, std::string> meta_;  // sorted => deterministic
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace pcaspin::io
