#include "eis/error.hpp"

namespace eis {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_record: return "InvalidRecord";
    case ErrorCode::duplicate_id: return "DuplicateId";
    case ErrorCode::empty_query: return "EmptyQuery";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::evaluation_error: return "EvaluationError";
    case ErrorCode::not_found: return "NotFound";
    case ErrorCode::order_violation: return "OrderViolation";
    case ErrorCode::invalid_event: return "InvalidEvent";
    case ErrorCode::invalid_spec: return "InvalidSpec";
    case ErrorCode::evidence_error: return "EvidenceError";
    case ErrorCode::query_error: return "QueryError";
    case ErrorCode::case_error: return "CaseError";
    case ErrorCode::space_too_large: return "SpaceTooLarge";
    case ErrorCode::fusion_error: return "FusionError";
    case ErrorCode::adaptation_error: return "AdaptationError";
    case ErrorCode::summary_error: return "SummaryError";
    case ErrorCode::config_error: return "ConfigError";
    case ErrorCode::io_error: return "IoError";
    }
    return "Unknown";
}

}  // namespace eis
