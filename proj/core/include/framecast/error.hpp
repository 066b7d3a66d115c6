#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace framecast {

// Domain error with a stable machine-readable code. The CLI maps these to
// single-line JSON on stderr; tests match on code() rather than message text.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Codes in use: invalid_input, empty_histogram, degenerate_input,
// rank_deficient, shape_mismatch, key_mismatch, unknown_id, io, config.
[[noreturn]] inline void fail(std::string code, const std::string& what) {
  throw Error(std::move(code), what);
}

inline void require(bool ok, const char* code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace framecast
