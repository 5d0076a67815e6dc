#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "eis/vendor_json.hpp"

namespace eis::user {

enum class ActivityKind { dialogue_utterance, query_issued, result_clicked, profile_edit };

std::string_view to_string(ActivityKind k) noexcept;
std::optional<ActivityKind> parse_activity_kind(std::string_view s);

using Profile = std::map<std::string, std::string>;

/// One observed interaction. `text` is required for dialogue_utterance and
/// query_issued, `doc_id` for result_clicked; profile_edit carries the
/// re-declared slots in `profile`.
struct ActivityEvent {
    std::string session_id;
    std::uint64_t seq = 0;
    std::string timestamp;  // ISO-8601 instant
    ActivityKind kind = ActivityKind::dialogue_utterance;
    std::optional<std::string> text;
    std::optional<std::string> doc_id;
    Profile profile;

    bool operator==(const ActivityEvent&) const = default;
};

bool is_iso8601_instant(std::string_view s);

// Year of an ISO-8601 instant (first four digits).
int year_of(std::string_view timestamp);

// Throws Error(invalid_event) naming the offending field.
void validate_event(const ActivityEvent& e);

nlohmann::json to_json(const ActivityEvent& e);

// Field-level type errors and invariant violations throw
// Error(invalid_event) naming the field.
ActivityEvent event_from_json(const nlohmann::json& j);

}  // namespace eis::user
