#pragma once

#include <stdexcept>
#include <string>

namespace qkdnet {

// Numeric values are part of the C ABI (see include/qkdnet/qkdnet.h).
enum class ErrorCode : int {
  invalid_argument = 1,
  domain = 2,
  parse = 3,
  io = 4,
  not_found = 5,
  unphysical_statistics = 6,
  insufficient_decoy_data = 7,
  desynchronized_session = 8,
  reconciliation_failed = 9,
  no_secure_key = 10,
  port_busy = 11,
  port_offline = 12,
  self_connection = 13,
  not_connected = 14,
  unroutable = 15,
  key_exhausted = 16,
  key_reuse_refused = 17,
  desynchronized_pools = 18,
  invalid_intensity_ordering = 19,
  undefined_qber = 20,
  internal = 99,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const char* what) {
  if (!condition) fail(code, what);
}

}  // namespace qkdnet
