#include "eis/user/activity.hpp"

#include <regex>

#include "eis/error.hpp"

namespace eis::user {

std::string_view to_string(ActivityKind k) noexcept {
    switch (k) {
    case ActivityKind::dialogue_utterance: return "dialogue_utterance";
    case ActivityKind::query_issued: return "query_issued";
    case ActivityKind::result_clicked: return "result_clicked";
    case ActivityKind::profile_edit: return "profile_edit";
    }
    return "dialogue_utterance";
}

std::optional<ActivityKind> parse_activity_kind(std::string_view s) {
    for (auto k : {ActivityKind::dialogue_utterance, ActivityKind::query_issued, ActivityKind::result_clicked,
                   ActivityKind::profile_edit})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

bool is_iso8601_instant(std::string_view s) {
    static const std::regex re(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?(Z|[+-]\d{2}:\d{2}))");
    return std::regex_match(s.begin(), s.end(), re);
}

int year_of(std::string_view ts) {
    if (ts.size() < 4) throw Error(ErrorCode::invalid_event, "timestamp too short", "timestamp");
    return std::stoi(std::string(ts.substr(0, 4)));
}

void validate_event(const ActivityEvent& e) {
    if (e.seq == 0) throw Error(ErrorCode::invalid_event, "seq must be a positive integer", "seq");
    if (!is_iso8601_instant(e.timestamp))
        throw Error(ErrorCode::invalid_event, "timestamp '" + e.timestamp + "' is not an ISO-8601 instant",
                    "timestamp");
    switch (e.kind) {
    case ActivityKind::dialogue_utterance:
    case ActivityKind::query_issued:
        if (!e.text) throw Error(ErrorCode::invalid_event, std::string(to_string(e.kind)) + " requires text", "text");
        break;
    case ActivityKind::result_clicked:
        if (!e.doc_id || e.doc_id->empty())
            throw Error(ErrorCode::invalid_event, "result_clicked requires doc_id", "doc_id");
        break;
    case ActivityKind::profile_edit:
        if (e.profile.empty())
            throw Error(ErrorCode::invalid_event, "profile_edit requires at least one profile slot", "profile");
        break;
    }
}

nlohmann::json to_json(const ActivityEvent& e) {
    nlohmann::json j{{"session_id", e.session_id},
                     {"seq", e.seq},
                     {"timestamp", e.timestamp},
                     {"kind", to_string(e.kind)}};
    if (e.text) j["text"] = *e.text;
    if (e.doc_id) j["doc_id"] = *e.doc_id;
    if (!e.profile.empty()) j["profile"] = e.profile;
    return j;
}

ActivityEvent event_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::invalid_event, "event must be an object", "event");
    ActivityEvent e;
    auto str = [&](const char* key, bool required) -> std::optional<std::string> {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) {
            if (required) throw Error(ErrorCode::invalid_event, std::string("missing '") + key + "'", key);
            return std::nullopt;
        }
        if (!it->is_string()) throw Error(ErrorCode::invalid_event, std::string("'") + key + "' must be a string", key);
        return it->get<std::string>();
    };
    e.session_id = str("session_id", false).value_or("");
    auto seq = j.find("seq");
    if (seq == j.end() || !seq->is_number_unsigned())
        throw Error(ErrorCode::invalid_event, "'seq' must be a positive integer", "seq");
    e.seq = seq->get<std::uint64_t>();
    e.timestamp = *str("timestamp", true);
    const auto kind = *str("kind", true);
    auto k = parse_activity_kind(kind);
    if (!k) throw Error(ErrorCode::invalid_event, "unknown kind '" + kind + "'", "kind");
    e.kind = *k;
    e.text = str("text", false);
    e.doc_id = str("doc_id", false);
    if (auto p = j.find("profile"); p != j.end() && !p->is_null()) {
        if (!p->is_object()) throw Error(ErrorCode::invalid_event, "'profile' must be an object", "profile");
        for (const auto& [slot, v] : p->items()) {
            if (!v.is_string())
                throw Error(ErrorCode::invalid_event, "profile slot '" + slot + "' must be a string", "profile");
            e.profile[slot] = v.get<std::string>();
        }
    }
    validate_event(e);
    return e;
}

}  // namespace eis::user
