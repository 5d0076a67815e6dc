#include "eis/service/engine.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "eis/corpus/io.hpp"
#include "eis/corpus/query.hpp"
#include "eis/dbn/io.hpp"
#include "eis/error.hpp"

namespace eis::service {

namespace fs = std::filesystem;

nlohmann::json to_json(const LogRecord& r) {
    if (r.type == LogRecord::Type::open)
        return {{"record", "open"}, {"session_id", r.session_id}, {"user_id", r.user_id}, {"profile", r.profile}};
    auto j = user::to_json(r.event);
    j["record"] = "event";
    if (r.receipt) j["receipt"] = r.receipt;
    return j;
}

LogRecord log_record_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::invalid_event, "log record must be an object", "record");
    LogRecord r;
    std::string type = "event";
    if (auto it = j.find("record"); it != j.end()) {
        if (!it->is_string()) throw Error(ErrorCode::invalid_event, "'record' must be a string", "record");
        type = it->get<std::string>();
    }
    if (type == "open") {
        r.type = LogRecord::Type::open;
        auto str = [&](const char* key) {
            auto it = j.find(key);
            if (it == j.end() || it->is_null()) return std::string();
            if (!it->is_string())
                throw Error(ErrorCode::invalid_event, std::string("'") + key + "' must be a string", key);
            return it->get<std::string>();
        };
        r.session_id = str("session_id");
        r.user_id = str("user_id");
        if (auto p = j.find("profile"); p != j.end() && !p->is_null()) {
            if (!p->is_object()) throw Error(ErrorCode::invalid_event, "'profile' must be an object", "profile");
            for (const auto& [slot, v] : p->items()) {
                if (!v.is_string())
                    throw Error(ErrorCode::invalid_event, "profile slot '" + slot + "' must be a string", "profile");
                r.profile[slot] = v.get<std::string>();
            }
        }
        return r;
    }
    if (type != "event") throw Error(ErrorCode::invalid_event, "unknown record type '" + type + "'", "record");
    if (auto it = j.find("receipt"); it != j.end()) {
        if (!it->is_number_unsigned() || it->get<std::uint64_t>() == 0)
            throw Error(ErrorCode::invalid_event, "'receipt' must be a positive integer", "receipt");
        r.receipt = it->get<std::uint64_t>();
    }
    r.event = user::event_from_json(j);
    return r;
}

std::vector<LogRecord> read_log(std::istream& in) {
    std::vector<LogRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        try {
            out.push_back(log_record_from_json(nlohmann::json::parse(line)));
        } catch (const Error& e) {
            throw Error(e.code(), "line " + std::to_string(lineno) + ": " + e.what(), e.field());
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::invalid_event, "line " + std::to_string(lineno) + ": " + e.what(), "record");
        }
    }
    return out;
}

SessionLog::SessionLog(fs::path data_dir) : dir_(std::move(data_dir) / "sessions") {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::io_error, "cannot create '" + dir_.string() + "': " + ec.message(), "data_dir");
}

fs::path SessionLog::path_for(const std::string& session_id) const { return dir_ / (session_id + ".jsonl"); }

void SessionLog::append(const LogRecord& record) {
    const auto& id = record.type == LogRecord::Type::open ? record.session_id : record.event.session_id;
    const auto line = to_json(record).dump() + "\n";
    std::lock_guard lock(mu_);
    std::ofstream out(path_for(id), std::ios::app | std::ios::binary);
    out << line;
    out.flush();
    if (!out) throw Error(ErrorCode::io_error, "cannot append to log of session '" + id + "'", "data_dir");
}

std::map<std::string, std::vector<LogRecord>> SessionLog::load_all() const {
    std::map<std::string, std::vector<LogRecord>> out;
    for (const auto& entry : fs::directory_iterator(dir_)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".jsonl") continue;
        std::ifstream in(entry.path());
        try {
            out[entry.path().stem().string()] = read_log(in);
        } catch (const Error& e) {
            throw Error(ErrorCode::io_error, entry.path().string() + ": " + e.what(), "data_dir");
        }
    }
    return out;
}

Engine::Engine(std::shared_ptr<const corpus::CorpusIndex> corpus, std::shared_ptr<const user::UserModel> model,
               adapt::AdaptationConfig config, std::string corpus_path, std::string data_dir)
    : corpus_(std::move(corpus)),
      model_(std::move(model)),
      config_(std::move(config)),
      corpus_path_(std::move(corpus_path)),
      sessions_(model_) {
    adapt::validate_config(config_, model_->network->variable(*model_->network->variable_index(model_->objective_variable)).domain);
    if (!data_dir.empty()) log_ = std::make_unique<SessionLog>(data_dir);
}

std::unique_ptr<Engine> Engine::load(const ServiceConfig& config, const Overrides& overrides) {
    auto warn = [](const std::string& w) { std::cerr << "warning: " << w << "\n"; };
    auto docs = corpus::read_corpus_file(config.corpus_path, warn);
    auto index = std::make_shared<const corpus::CorpusIndex>(corpus::ingest_corpus(docs));
    auto network = std::make_shared<const dbn::Network>(dbn::read_network_file(config.network_path));
    auto model = std::make_shared<const user::UserModel>(user::read_user_model_file(config.lexicon_path, network));
    auto adaptation = adapt::read_config_file(config.adaptation_path);
    overrides.apply(adaptation);
    auto engine = std::make_unique<Engine>(std::move(index), std::move(model), std::move(adaptation),
                                           config.corpus_path, config.data_dir);
    engine->recover();
    return engine;
}

std::shared_ptr<const corpus::CorpusIndex> Engine::corpus() const {
    std::shared_lock lock(corpus_mu_);
    return corpus_;
}

void Engine::swap_corpus(std::shared_ptr<const corpus::CorpusIndex> next) {
    std::unique_lock lock(corpus_mu_);
    corpus_.swap(next);
}

std::size_t Engine::reindex() {
    if (corpus_path_.empty()) throw Error(ErrorCode::config_error, "no corpus file configured", "corpus");
    auto docs = corpus::read_corpus_file(corpus_path_);
    auto next = std::make_shared<const corpus::CorpusIndex>(corpus::ingest_corpus(docs));
    const auto n = next->size();
    swap_corpus(std::move(next));
    return n;
}

std::string Engine::open_session(const std::string& user_id, const user::Profile& profile) {
    auto id = sessions_.open_session(user_id, profile);
    if (log_) {
        LogRecord r;
        r.type = LogRecord::Type::open;
        r.session_id = id;
        r.user_id = user_id;
        r.profile = profile;
        log_->append(r);
    }
    return id;
}

user::UserState Engine::record_activity(const std::string& session_id, user::ActivityEvent event) {
    auto snapshot = corpus();
    user::SessionStore::CommitHook commit;
    if (log_) {
        commit = [&](const user::UserState& next) {
            LogRecord r;
            r.event = next.activities.back();
            std::lock_guard lock(receipts_mu_);
            r.receipt = receipts_[session_id] + 1;
            log_->append(r);
            receipts_[session_id] = r.receipt;
        };
    }
    return sessions_.record_activity(session_id, std::move(event), snapshot.get(), commit);
}

user::UserState Engine::state(const std::string& session_id) const { return sessions_.get_user_state(session_id); }

adapt::ResultSet Engine::query(const std::string& session_id, const std::string& query_text) const {
    auto s = sessions_.get_user_state(session_id);
    auto q = corpus::parse_query(query_text);
    auto snapshot = corpus();
    return adapt::compute_R(*snapshot, s, q, config_);
}

std::size_t Engine::recover() {
    if (!log_) return 0;
    auto snapshot = corpus();
    std::size_t n = 0;
    for (const auto& [id, records] : log_->load_all()) {
        if (sessions_.contains(id)) continue;
        if (records.empty() || records.front().type != LogRecord::Type::open)
            throw Error(ErrorCode::io_error, "log of session '" + id + "' does not start with an open record",
                        "data_dir");
        const auto& open = records.front();
        sessions_.open_session_with_id(id, open.user_id, open.profile);
        std::uint64_t receipt = 0;
        for (std::size_t i = 1; i < records.size(); ++i) {
            const auto& r = records[i];
            if (r.type != LogRecord::Type::event || r.receipt <= receipt)
                throw Error(ErrorCode::io_error, "log of session '" + id + "' is corrupt at record " +
                                                     std::to_string(i + 1), "data_dir");
            receipt = r.receipt;
            sessions_.record_activity(id, r.event, snapshot.get());
        }
        std::lock_guard lock(receipts_mu_);
        receipts_[id] = receipt;
        ++n;
    }
    return n;
}

namespace {

nlohmann::json posterior_json(const user::UserState& s) {
    nlohmann::json p = nlohmann::json::object();
    for (std::size_t i = 0; i < s.objective_catalog.size(); ++i) p[s.objective_catalog[i]] = s.objective_posterior[i];
    return p;
}

nlohmann::json slots_json(const std::map<std::string, user::SlotValue>& slots) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : slots) j[k] = {{"value", v.value}, {"source", user::to_string(v.source)}};
    return j;
}

nlohmann::json error_json(const Error& e) {
    nlohmann::json j = {{"code", to_string(e.code())}, {"message", e.what()}};
    if (!e.field().empty()) j["field"] = e.field();
    return j;
}

}  // namespace

ReplayResult replay(const corpus::CorpusIndex& corpus, const user::UserModel& model,
                    const adapt::AdaptationConfig& config, const std::vector<LogRecord>& records) {
    std::size_t first = 0;
    std::string session_id = "replay", user_id;
    user::Profile profile;
    if (!records.empty() && records.front().type == LogRecord::Type::open) {
        if (!records.front().session_id.empty()) session_id = records.front().session_id;
        user_id = records.front().user_id;
        profile = records.front().profile;
        first = 1;
    }

    ReplayResult out;
    auto state = user::new_user_state(model, session_id, user_id, profile);
    out.reports.push_back({{"step", 0},
                           {"type", "initial"},
                           {"session_id", state.session_id},
                           {"objective_posterior", posterior_json(state)},
                           {"individual_characteristics", slots_json(state.individual_characteristics)},
                           {"context", slots_json(state.context)}});

    std::uint64_t receipt = 0;
    for (std::size_t i = first; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.type != LogRecord::Type::event)
            throw Error(ErrorCode::invalid_event, "record " + std::to_string(i + 1) + ": unexpected open record",
                        "record");
        if (r.receipt) {
            if (r.receipt <= receipt)
                throw Error(ErrorCode::order_violation,
                            "record " + std::to_string(i + 1) + ": receipt " + std::to_string(r.receipt) +
                                " is not after " + std::to_string(receipt),
                            "receipt");
            receipt = r.receipt;
        }
        nlohmann::json rep = {{"step", out.reports.size()},
                              {"type", "event"},
                              {"seq", r.event.seq},
                              {"kind", user::to_string(r.event.kind)}};
        try {
            state = user::apply_activity(model, state, r.event, &corpus, Exec::serial);
        } catch (const Error& e) {
            rep["rejected"] = error_json(e);
            out.reports.push_back(std::move(rep));
            continue;
        }
        const auto& step = state.steps.back();
        rep["evidence"] = step.evidence;
        rep["evidence_ignored"] = step.evidence_ignored;
        rep["objective_posterior"] = posterior_json(state);
        rep["individual_characteristics"] = slots_json(state.individual_characteristics);
        rep["context"] = slots_json(state.context);
        if (r.event.kind == user::ActivityKind::query_issued) {
            try {
                auto q = corpus::parse_query(*r.event.text);
                rep["result"] = adapt::to_json(adapt::compute_R(corpus, state, q, config, Exec::serial));
            } catch (const Error& e) {
                rep["result_error"] = error_json(e);
            }
        }
        out.reports.push_back(std::move(rep));
    }
    out.final_state = std::move(state);
    return out;
}

ReplayResult replay(const corpus::CorpusIndex& corpus, const user::UserModel& model,
                    const adapt::AdaptationConfig& config, std::istream& log) {
    return replay(corpus, model, config, read_log(log));
}

}  // namespace eis::service
