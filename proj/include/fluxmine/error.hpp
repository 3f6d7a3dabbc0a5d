#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fluxmine {

enum class ErrorCode {
  invalid_sigma,
  invalid_width,
  invalid_alphabet,
  invalid_symbol,
  length_mismatch,
  shape_mismatch,
  band_too_narrow,
  kind_mismatch,
  empty_cluster,
  too_many_clusters,
  invalid_argument,
  undefined_index,
  invalid_confidence,
  lane_absent,
  invalid_profile,
  target_not_found,
  parse_error,
  io_error,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_sigma: return "invalid_sigma";
    case ErrorCode::invalid_width: return "invalid_width";
    case ErrorCode::invalid_alphabet: return "invalid_alphabet";
    case ErrorCode::invalid_symbol: return "invalid_symbol";
    case ErrorCode::length_mismatch: return "length_mismatch";
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::band_too_narrow: return "band_too_narrow";
    case ErrorCode::kind_mismatch: return "kind_mismatch";
    case ErrorCode::empty_cluster: return "empty_cluster";
    case ErrorCode::too_many_clusters: return "too_many_clusters";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::undefined_index: return "undefined_index";
    case ErrorCode::invalid_confidence: return "invalid_confidence";
    case ErrorCode::lane_absent: return "lane_absent";
    case ErrorCode::invalid_profile: return "invalid_profile";
    case ErrorCode::target_not_found: return "target_not_found";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

/// Exception carrying a machine-readable code; every precondition failure in
/// the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fluxmine
