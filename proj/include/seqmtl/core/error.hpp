#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seqmtl {

enum class ErrorKind {
  shape_mismatch,
  non_finite_value,
  backward_before_forward,
  index_out_of_range,
  malformed_line,
  unknown_tag_prefix,
  ragged_dimension,
  insufficient_coverage,
  insufficient_data,
  non_finite_gradient,
  non_finite_loss,
  missing_k,
  empty_records,
  config,
  io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::shape_mismatch: return "shape-mismatch";
    case ErrorKind::non_finite_value: return "non-finite-value";
    case ErrorKind::backward_before_forward: return "backward-before-forward";
    case ErrorKind::index_out_of_range: return "index-out-of-range";
    case ErrorKind::malformed_line: return "malformed-line";
    case ErrorKind::unknown_tag_prefix: return "unknown-tag-prefix";
    case ErrorKind::ragged_dimension: return "ragged-dimension";
    case ErrorKind::insufficient_coverage: return "insufficient-coverage";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::non_finite_gradient: return "non-finite-gradient";
    case ErrorKind::non_finite_loss: return "non-finite-loss";
    case ErrorKind::missing_k: return "missing-k";
    case ErrorKind::empty_records: return "empty-records";
    case ErrorKind::config: return "configuration-error";
    case ErrorKind::io: return "io-error";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind so the
/// CLI can map it onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace seqmtl
