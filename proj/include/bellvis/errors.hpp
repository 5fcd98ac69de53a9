#pragma once

#include <stdexcept>
#include <string>

namespace bellvis {

// Invalid experiment description, option value or config file contents.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Vector or tuple lengths that do not match the experiment layout.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Probability table is missing an entry required by the LP, or holds an
// out-of-range value.
class TableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A requested dense materialization or export exceeds its size cap.
class SizeCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical breakdown inside a solver component.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bellvis
