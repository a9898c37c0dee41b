#pragma once

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "photon_reshape/errors.hpp"

namespace photon_reshape {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

/// Log level from PHOTON_RESHAPE_LOG (error|warn|info|debug), default warn.
inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("PHOTON_RESHAPE_LOG");
    if (!env) return LogLevel::warn;
    const std::string v(env);
    if (v == "error") return LogLevel::error;
    if (v == "warn") return LogLevel::warn;
    if (v == "info") return LogLevel::info;
    if (v == "debug") return LogLevel::debug;
    std::cerr << "[warn] unknown PHOTON_RESHAPE_LOG value '" << v
              << "', using warn\n";
    return LogLevel::warn;
  }();
  return level;
}

inline void log_message(LogLevel level, const std::string& message) {
  static const char* names[] = {"error", "warn", "info", "debug"};
  if (level <= log_level())
    std::cerr << "[" << names[static_cast<int>(level)] << "] " << message << "\n";
}

inline void log_warn(const std::string& m) { log_message(LogLevel::warn, m); }
inline void log_info(const std::string& m) { log_message(LogLevel::info, m); }
inline void log_debug(const std::string& m) { log_message(LogLevel::debug, m); }

/// Shortest round-trip decimal form; locale-independent and deterministic.
inline std::string format_double(double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw config_error("cannot open output file: " + path.string());
  }

  void header(const std::vector<std::string>& names) {
    for (size_t i = 0; i < names.size(); ++i) {
      if (i) out_ << ", ";
      out_ << names[i];
    }
    out_ << "\n";
  }

  void row(const std::vector<double>& values) {
    for (size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ", ";
      out_ << format_double(values[i]);
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

/// Matrix CSV with one axis header row and one axis header column:
/// first cell names the layout, first row carries the column axis, first
/// column the row axis.
inline void write_matrix_csv(const std::filesystem::path& path,
                             const std::string& corner_label,
                             const Eigen::ArrayXd& row_axis,
                             const Eigen::ArrayXd& col_axis,
                             const Eigen::MatrixXd& values) {
  if (values.rows() != row_axis.size() || values.cols() != col_axis.size())
    throw std::invalid_argument("write_matrix_csv: shape mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot open output file: " + path.string());
  out << corner_label;
  for (Eigen::Index j = 0; j < col_axis.size(); ++j)
    out << ", " << format_double(col_axis[j]);
  out << "\n";
  for (Eigen::Index i = 0; i < row_axis.size(); ++i) {
    out << format_double(row_axis[i]);
    for (Eigen::Index j = 0; j < col_axis.size(); ++j)
      out << ", " << format_double(values(i, j));
    out << "\n";
  }
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot open output file: " + path.string());
  out << content;
}

/// FNV-1a 64-bit hash, used to fingerprint configurations in manifests.
inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[v & 0xf];
    v >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf);
}

}  // namespace photon_reshape
