#include "airq/error.hpp"

namespace airq {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "invalid_parameter";
    case ErrorCode::kInsufficientData: return "insufficient_data";
    case ErrorCode::kDegenerateData: return "degenerate_data";
    case ErrorCode::kSaturatedReading: return "saturated_reading";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kSchema: return "schema_error";
    case ErrorCode::kRange: return "range_error";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kRouting: return "routing_error";
    case ErrorCode::kConfig: return "config_error";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kNetwork: return "network_error";
    case ErrorCode::kProtocol: return "protocol_error";
    case ErrorCode::kScenarioAbort: return "scenario_abort";
  }
  return "unknown";
}

}  // namespace airq
