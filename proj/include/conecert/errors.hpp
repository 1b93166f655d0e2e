#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace conecert {

// Malformed cone/density/variety strings. `position` is the 0-based offset of
// the offending character in the input.
class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& input, std::size_t position, const std::string& what)
      : std::invalid_argument(format(input, position, what)), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  static std::string format(const std::string& input, std::size_t position,
                            const std::string& what) {
    std::string msg = "cannot parse '" + input + "' at position " +
                      std::to_string(position) + ": " + what + "\n  " + input + "\n  ";
    msg.append(position, ' ');
    msg += '^';
    return msg;
  }

  std::size_t position_;
};

// Numerical preconditions that cannot be met (coarse mesh, overflow, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace conecert
