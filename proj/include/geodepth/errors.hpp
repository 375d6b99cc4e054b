#pragma once

#include <stdexcept>
#include <string>

namespace geodepth {

/// Error raised while parsing label or calibration text. Carries the
/// 1-based line number and, when known, the 1-based character column of
/// the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line = 0, int column = 0)
      : std::runtime_error(location_prefix(line, column) + message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string location_prefix(int line, int column) {
    if (line <= 0) return {};
    std::string s = "line " + std::to_string(line);
    if (column > 0) s += ", column " + std::to_string(column);
    return s + ": ";
  }

  int line_;
  int column_;
};

/// Error raised for unusable configuration (infeasible generator spec,
/// missing fixture directory, bad bucket definitions).
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Error raised for filesystem problems (unreadable directory, failed write).
class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace geodepth
