// errors.hpp -- exception types shared by all tofforge modules
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tofforge {

/// Invalid parameters: bad spec dimensions, kernel wider than window, etc.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed text input. Row and column are 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& what)
      : std::runtime_error("line " + std::to_string(row) + ", column " +
                           std::to_string(column) + ": " + what),
        row_{row}, column_{column} {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// A target description that contains no reflecting points.
class EmptyTargetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One or more surfaces fall outside the histogram window.
class OutOfWindowError : public std::runtime_error {
 public:
  explicit OutOfWindowError(std::vector<double> distances)
      : std::runtime_error(format(distances)), distances_{std::move(distances)} {}

  /// Offending surface distances in meters.
  const std::vector<double>& distances() const noexcept { return distances_; }

 private:
  static std::string format(const std::vector<double>& d) {
    std::string s = std::to_string(d.size()) + " surface(s) outside histogram window, d =";
    const std::size_t shown = d.size() < 8 ? d.size() : 8;
    for (std::size_t i = 0; i < shown; ++i) s += " " + std::to_string(d[i]);
    if (shown < d.size()) s += " ...";
    return s;
  }

  std::vector<double> distances_;
};

}  // namespace tofforge
