#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace meshforge {

/// Base class for every domain error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A feedforward netlist contains a directed cycle. `nodes()` lists the
/// node ids that lie on (or between) cycles.
class CycleError : public Error {
 public:
  explicit CycleError(std::vector<int> nodes);
  const std::vector<int>& nodes() const { return nodes_; }

 private:
  std::vector<int> nodes_;
};

/// A link is missing its producer or consumer, or has more than one.
class DanglingLinkError : public Error {
 public:
  DanglingLinkError(int link, const std::string& what);
  int link() const { return link_; }

 private:
  int link_;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class NonUnitaryError : public Error {
 public:
  explicit NonUnitaryError(double deviation);
  /// Measured ||U^dag U - I||_F.
  double deviation() const { return deviation_; }

 private:
  double deviation_;
};

class OrderError : public Error {
 public:
  using Error::Error;
};

class NonLinearizableError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or command line value.
class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace meshforge
