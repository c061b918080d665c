#pragma once

#include <stdexcept>
#include <string>

namespace rdc {

/// Input or configuration rejected before any simulation work.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A field value became NaN/Inf. Carries the offending cell.
class NumericalError : public std::runtime_error {
public:
  NumericalError(const std::string& what, int x, int y)
      : std::runtime_error(what), x_(x), y_(y) {}
  int x() const { return x_; }
  int y() const { return y_; }

private:
  int x_;
  int y_;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Wire framing violation on the session transport.
class ProtocolError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace rdc
