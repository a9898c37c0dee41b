#pragma once

#include <stdexcept>
#include <string>

namespace photon_reshape {

/// Invalid or inconsistent run configuration (CLI exit code 2).
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical consistency guard tripped, e.g. |W| > 1 (CLI exit code 3).
class numerics_error : public std::runtime_error {
 public:
  explicit numerics_error(const std::string& what) : std::runtime_error(what) {}
};

/// Calibration target unreachable with the given template (CLI exit code 4).
class saturation_error : public std::runtime_error {
 public:
  explicit saturation_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace photon_reshape
