#pragma once

// Error taxonomy shared by the whole library.  Every failure carries a
// stable machine-readable tag (asserted on in tests and surfaced through
// the C API) plus a category that maps 1:1 onto CLI exit codes.

#include <stdexcept>
#include <string>
#include <utility>

namespace ctmc {

enum class errc : int {
  syntax = 2,       // unparsable input text
  validation = 3,   // parsable but violates a model invariant
  precondition = 4, // operation preconditions not met
  solver = 5,       // numerical solve failed
  simulation = 6,   // stochastic simulation failed
  invalid_argument = 7,
  internal = 8, // indicates a bug in this library, not bad input
};

class error : public std::runtime_error {
public:
  error(errc code, std::string tag, const std::string &what)
      : std::runtime_error(tag + ": " + what), code_(code),
        tag_(std::move(tag)) {}

  errc code() const noexcept { return code_; }
  const std::string &tag() const noexcept { return tag_; }

private:
  errc code_;
  std::string tag_;
};

[[noreturn]] inline void fail(errc code, std::string tag,
                              const std::string &what) {
  throw error(code, std::move(tag), what);
}

} // namespace ctmc
