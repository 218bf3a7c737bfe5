#include "error.hpp"

namespace qkdnet {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::domain: return "domain error";
    case ErrorCode::parse: return "parse error";
    case ErrorCode::io: return "i/o error";
    case ErrorCode::not_found: return "not found";
    case ErrorCode::unphysical_statistics: return "unphysical statistics";
    case ErrorCode::insufficient_decoy_data: return "insufficient decoy data";
    case ErrorCode::desynchronized_session: return "desynchronized session";
    case ErrorCode::reconciliation_failed: return "reconciliation failed";
    case ErrorCode::no_secure_key: return "no secure key";
    case ErrorCode::port_busy: return "port busy";
    case ErrorCode::port_offline: return "port offline";
    case ErrorCode::self_connection: return "self-connection";
    case ErrorCode::not_connected: return "not connected";
    case ErrorCode::unroutable: return "unroutable";
    case ErrorCode::key_exhausted: return "key exhausted";
    case ErrorCode::key_reuse_refused: return "key reuse refused";
    case ErrorCode::desynchronized_pools: return "desynchronized pools";
    case ErrorCode::invalid_intensity_ordering: return "invalid intensity ordering";
    case ErrorCode::undefined_qber: return "undefined QBER";
    case ErrorCode::internal: return "internal error";
  }
  return "unknown error";
}

}  // namespace qkdnet
