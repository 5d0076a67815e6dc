#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "eis/corpus/index.hpp"
#include "eis/dbn/inference.hpp"
#include "eis/dbn/learning.hpp"
#include "eis/user/activity.hpp"
#include "eis/user/lexicon.hpp"

namespace eis::user {

enum class SlotSource { declared, inferred };

std::string_view to_string(SlotSource s) noexcept;

struct SlotValue {
    std::string value;
    SlotSource source = SlotSource::inferred;

    bool operator==(const SlotValue&) const = default;
};

// What one filter step saw.
struct StepRecord {
    dbn::Evidence evidence;  // lexicon evidence plus declared clamps
    bool evidence_ignored = false;
    std::vector<std::size_t> hidden_argmax;  // filtered marginal argmax per hidden variable

    bool operator==(const StepRecord&) const = default;
};

/// The user model of one session: objective distribution, individual
/// characteristics, context and the activity log.
struct UserState {
    std::string session_id;
    std::string user_id;
    std::vector<std::string> objective_catalog;
    std::vector<double> objective_posterior;
    std::map<std::string, SlotValue> individual_characteristics;
    std::map<std::string, SlotValue> context;
    std::vector<ActivityEvent> activities;
    std::vector<StepRecord> steps;  // one per activity
    dbn::BeliefState belief;

    bool operator==(const UserState&) const = default;

    std::uint64_t last_seq() const { return activities.empty() ? 0 : activities.back().seq; }
};

// Fresh state at slice 0. Declared slots bound to a network variable must
// name a value of its domain (Error(invalid_event) otherwise).
UserState new_user_state(const UserModel& model, std::string session_id, std::string user_id,
                         const Profile& declared);

/// Pure transition: validates and appends `event`, extracts evidence, clamps
/// declared slots and runs one filter step. Throws Error(invalid_event) or
/// Error(order_violation); the input state is never modified.
UserState apply_activity(const UserModel& model, const UserState& state, ActivityEvent event,
                         const corpus::CorpusIndex* corpus = nullptr, Exec exec = Exec::parallel);

// Declared-profile clamps as evidence on the bound hidden variables.
dbn::Evidence declared_clamps(const UserModel& model, const UserState& state);

// Self-training case: per-slice filtered argmax for temporal hidden
// variables, final-slice argmax for static ones, observed values from the
// recorded evidence.
dbn::CompletedCase completed_case(const UserModel& model, const UserState& state);

nlohmann::json to_json(const UserState& s);

/// Thread-safe in-memory session registry. Events for one session are
/// serialised by a per-session lock; distinct sessions proceed in parallel.
class SessionStore {
public:
    explicit SessionStore(std::shared_ptr<const UserModel> model);

    const UserModel& model() const noexcept { return *model_; }

    std::string open_session(const std::string& user_id, const Profile& declared = {});

    // Re-creates a session under a known id (log recovery). Throws
    // Error(invalid_event) if the id is taken.
    void open_session_with_id(const std::string& session_id, const std::string& user_id, const Profile& declared);

    // Called with the new state under the session lock before it is
    // published; a throw aborts the update.
    using CommitHook = std::function<void(const UserState&)>;

    // Throws Error(not_found) for unknown sessions; on any error the session
    // is left unchanged.
    UserState record_activity(const std::string& session_id, ActivityEvent event,
                              const corpus::CorpusIndex* corpus = nullptr, const CommitHook& commit = {});

    UserState get_user_state(const std::string& session_id) const;

    bool contains(const std::string& session_id) const;
    std::vector<std::string> session_ids() const;

private:
    struct Session {
        mutable std::mutex mu;
        UserState state;
    };

    Session& lookup(const std::string& session_id) const;

    std::shared_ptr<const UserModel> model_;
    mutable std::shared_mutex mu_;
    std::map<std::string, std::unique_ptr<Session>> sessions_;
    std::uint64_t next_id_ = 1;
};

}  // namespace eis::user
