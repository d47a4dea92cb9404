#pragma once

#include <stdexcept>
#include <string>

namespace nlbox {

enum class errc {
  invalid_argument,
  too_large,
  unequal_magnitudes,
  missing_setting,
  non_unit_expression,
  dimension_mismatch,
  out_of_range,
  q_too_small,
  bad_config,
  arithmetic_overflow,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace nlbox
