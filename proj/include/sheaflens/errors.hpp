#pragma once

#include <stdexcept>
#include <string>

namespace sheaflens {

enum class ErrorCode {
  missing_empty_or_whole,
  not_closed_under_union,
  not_closed_under_intersection,
  cap_exceeded,
  space_mismatch,
  partial_assignment,
  commutativity_violation,
  stalk_shape_mismatch,
  invalid_pseudometric,
  sheaf_mismatch,
  no_support,
  non_convergence,
  base_map_not_continuous,
  square_violation,
  chain_mismatch,
  not_a_refinement,
  invalid_tau,
  non_composable,
  infinite_mismatch,
  empty_input,
  schema_error,
};

const char* error_code_name(ErrorCode code);

class SheafError : public std::runtime_error {
 public:
  SheafError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw SheafError(code, what);
}

}  // namespace sheaflens
