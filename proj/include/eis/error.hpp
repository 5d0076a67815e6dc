#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eis {

/// Machine-readable error category. Each value maps to one stable wire code
/// (see `to_string`) used by the HTTP error bodies and the CLI diagnostics.
enum class ErrorCode {
    invalid_record,
    duplicate_id,
    empty_query,
    parse_error,
    evaluation_error,
    not_found,
    order_violation,
    invalid_event,
    invalid_spec,
    evidence_error,
    query_error,
    case_error,
    space_too_large,
    fusion_error,
    adaptation_error,
    summary_error,
    config_error,
    io_error,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string field = {})
        : std::runtime_error(message), code_(code), field_(std::move(field)) {}

    ErrorCode code() const noexcept { return code_; }

    // Offending field / variable / record, when one can be named.
    const std::string& field() const noexcept { return field_; }

private:
    ErrorCode code_;
    std::string field_;
};

// Parse failures carry the byte offset into the query text.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t position)
        : Error(ErrorCode::parse_error,
                message + " at position " + std::to_string(position)),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

}  // namespace eis
