#pragma once

#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "eis/adapt/adaptation.hpp"
#include "eis/corpus/index.hpp"
#include "eis/service/config.hpp"
#include "eis/user/session.hpp"

namespace eis::service {

/// One line of a session log: either the session opening or an accepted
/// event with its server-assigned receipt number.
struct LogRecord {
    enum class Type { open, event };

    Type type = Type::event;
    std::string session_id;
    std::string user_id;
    user::Profile profile;
    std::uint64_t receipt = 0;
    user::ActivityEvent event;
};

nlohmann::json to_json(const LogRecord& r);

// Throws Error(invalid_event) for a malformed record.
LogRecord log_record_from_json(const nlohmann::json& j);

// Parses a JSON Lines log; blank and '#' lines are skipped. Throws with the
// 1-based line number in the message.
std::vector<LogRecord> read_log(std::istream& in);

/// Append-only per-session JSON Lines files under `<data_dir>/sessions`.
class SessionLog {
public:
    explicit SessionLog(std::filesystem::path data_dir);

    void append(const LogRecord& record);

    // Every session's records in file order, sessions sorted by id.
    std::map<std::string, std::vector<LogRecord>> load_all() const;

    std::filesystem::path path_for(const std::string& session_id) const;

private:
    std::filesystem::path dir_;
    std::mutex mu_;
};

/// Runtime wiring: corpus snapshot, user model, adaptation config, session
/// store and optional log persistence.
class Engine {
public:
    Engine(std::shared_ptr<const corpus::CorpusIndex> corpus, std::shared_ptr<const user::UserModel> model,
           adapt::AdaptationConfig config, std::string corpus_path = {}, std::string data_dir = {});

    // Loads every configured file and recovers persisted sessions.
    static std::unique_ptr<Engine> load(const ServiceConfig& config, const Overrides& overrides = {});

    std::shared_ptr<const corpus::CorpusIndex> corpus() const;

    // Atomically replaces the corpus for subsequent readers.
    void swap_corpus(std::shared_ptr<const corpus::CorpusIndex> next);

    // Re-reads the configured corpus file; returns the new document count.
    std::size_t reindex();

    const user::UserModel& model() const noexcept { return *model_; }
    const adapt::AdaptationConfig& config() const noexcept { return config_; }
    const user::SessionStore& sessions() const noexcept { return sessions_; }

    std::string open_session(const std::string& user_id, const user::Profile& profile);
    user::UserState record_activity(const std::string& session_id, user::ActivityEvent event);
    user::UserState state(const std::string& session_id) const;
    adapt::ResultSet query(const std::string& session_id, const std::string& query_text) const;

    // Rebuilds sessions from the data directory; returns how many.
    std::size_t recover();

private:
    std::shared_ptr<const corpus::CorpusIndex> corpus_;
    mutable std::shared_mutex corpus_mu_;
    std::shared_ptr<const user::UserModel> model_;
    adapt::AdaptationConfig config_;
    std::string corpus_path_;
    std::unique_ptr<SessionLog> log_;
    user::SessionStore sessions_;
    std::mutex receipts_mu_;
    std::map<std::string, std::uint64_t> receipts_;
};

/// Deterministic replay of an activity log into a fresh session. Emits one
/// JSON report per step: the initial state, then every event (posterior,
/// slots, evidence, and the ResultSet for query_issued events). Rejected
/// events are reported and leave the state unchanged.
struct ReplayResult {
    std::vector<nlohmann::json> reports;
    user::UserState final_state;
};

ReplayResult replay(const corpus::CorpusIndex& corpus, const user::UserModel& model,
                    const adapt::AdaptationConfig& config, const std::vector<LogRecord>& records);

ReplayResult replay(const corpus::CorpusIndex& corpus, const user::UserModel& model,
                    const adapt::AdaptationConfig& config, std::istream& log);

}  // namespace eis::service
