#include "eis/user/session.hpp"

#include <cstdio>

#include "eis/error.hpp"

namespace eis::user {

std::string_view to_string(SlotSource s) noexcept {
    return s == SlotSource::declared ? "declared" : "inferred";
}

namespace {

std::map<std::string, SlotValue>& slot_map(UserState& s, SlotCategory c) {
    return c == SlotCategory::context ? s.context : s.individual_characteristics;
}

void declare(const UserModel& model, UserState& s, const Profile& profile) {
    for (const auto& [slot, value] : profile) {
        const auto* b = model.binding(slot);
        if (b && !b->variable.empty()) {
            const auto var = *model.network->variable_index(b->variable);
            if (!model.network->value_index(var, value))
                throw Error(ErrorCode::invalid_event,
                            "profile slot '" + slot + "': '" + value + "' is not a value of '" + b->variable + "'",
                            "profile." + slot);
        }
        const auto cat = b ? b->category : SlotCategory::individual_characteristics;
        slot_map(s, cat)[slot] = SlotValue{value, SlotSource::declared};
    }
}

void refresh_objective(const UserModel& model, UserState& s) {
    s.objective_posterior = dbn::query_posterior(*model.network, s.belief, model.objective_variable);
}

}  // namespace

UserState new_user_state(const UserModel& model, std::string session_id, std::string user_id,
                         const Profile& declared) {
    UserState s;
    s.session_id = std::move(session_id);
    s.user_id = std::move(user_id);
    const auto& net = *model.network;
    s.objective_catalog = net.variable(*net.variable_index(model.objective_variable)).domain;
    s.belief = dbn::init_belief(net);
    refresh_objective(model, s);
    declare(model, s, declared);
    return s;
}

dbn::Evidence declared_clamps(const UserModel& model, const UserState& state) {
    dbn::Evidence e;
    for (const auto& b : model.slots) {
        if (b.variable.empty()) continue;
        const auto& m = b.category == SlotCategory::context ? state.context : state.individual_characteristics;
        auto it = m.find(b.slot);
        if (it != m.end() && it->second.source == SlotSource::declared) e[b.variable] = it->second.value;
    }
    return e;
}

UserState apply_activity(const UserModel& model, const UserState& state, ActivityEvent event,
                         const corpus::CorpusIndex* corpus, Exec exec) {
    validate_event(event);
    if (event.session_id.empty()) {
        event.session_id = state.session_id;
    } else if (event.session_id != state.session_id) {
        throw Error(ErrorCode::invalid_event,
                    "event belongs to session '" + event.session_id + "', not '" + state.session_id + "'",
                    "session_id");
    }
    if (event.seq <= state.last_seq())
        throw Error(ErrorCode::order_violation,
                    "seq " + std::to_string(event.seq) + " is not greater than " + std::to_string(state.last_seq()),
                    "seq");

    const auto& net = *model.network;
    UserState next = state;
    if (event.kind == ActivityKind::profile_edit) {
        const auto before = declared_clamps(model, next);
        declare(model, next, event.profile);
        // A changed static characteristic cannot be reached by conditioning.
        for (const auto& [var, value] : declared_clamps(model, next)) {
            auto it = before.find(var);
            if (it != before.end() && it->second != value &&
                net.variable(*net.variable_index(var)).dynamics == dbn::Dynamics::static_)
                next.belief = dbn::forget(net, next.belief, var);
        }
    }

    const corpus::Document* clicked = nullptr;
    if (model.click_features && corpus && event.kind == ActivityKind::result_clicked)
        clicked = corpus->find(*event.doc_id);

    auto evidence = extract_evidence(event, model.lexicons, clicked);
    for (const auto& [var, value] : declared_clamps(model, next)) evidence[var] = value;

    auto step = dbn::filter_step(net, next.belief, evidence, exec);
    next.belief = std::move(step.belief);
    refresh_objective(model, next);

    StepRecord rec;
    rec.evidence = std::move(evidence);
    rec.evidence_ignored = step.evidence_ignored;
    rec.hidden_argmax = dbn::marginal_argmax(net, next.belief);

    for (const auto& b : model.slots) {
        if (b.variable.empty()) continue;
        auto& m = slot_map(next, b.category);
        auto it = m.find(b.slot);
        if (it != m.end() && it->second.source == SlotSource::declared) continue;
        const auto var = *net.variable_index(b.variable);
        m[b.slot] = SlotValue{net.variable(var).domain[rec.hidden_argmax[*net.hidden_position(var)]],
                              SlotSource::inferred};
    }

    next.activities.push_back(std::move(event));
    next.steps.push_back(std::move(rec));
    return next;
}

dbn::CompletedCase completed_case(const UserModel& model, const UserState& state) {
    const auto& net = *model.network;
    const auto initial = dbn::marginal_argmax(net, dbn::init_belief(net));
    const auto& final_argmax = state.steps.empty() ? initial : state.steps.back().hidden_argmax;

    auto hidden_slice = [&](const std::vector<std::size_t>& argmax) {
        dbn::Evidence slice;
        for (std::size_t k = 0; k < net.hidden().size(); ++k) {
            const auto& v = net.variable(net.hidden()[k]);
            const auto idx = v.dynamics == dbn::Dynamics::static_ ? final_argmax[k] : argmax[k];
            slice[v.name] = v.domain[idx];
        }
        return slice;
    };

    dbn::CompletedCase out;
    out.push_back(hidden_slice(initial));
    for (const auto& step : state.steps) {
        auto slice = hidden_slice(step.hidden_argmax);
        for (const auto& [var, value] : step.evidence)
            if (!net.hidden_position(*net.variable_index(var))) slice[var] = value;
        out.push_back(std::move(slice));
    }
    return out;
}

nlohmann::json to_json(const UserState& s) {
    using nlohmann::json;
    auto slots = [](const std::map<std::string, SlotValue>& m) {
        json out = json::object();
        for (const auto& [k, v] : m) out[k] = {{"value", v.value}, {"source", to_string(v.source)}};
        return out;
    };
    json objective = json::object();
    for (std::size_t i = 0; i < s.objective_catalog.size(); ++i)
        objective[s.objective_catalog[i]] = s.objective_posterior[i];
    json activities = json::array();
    for (std::size_t i = 0; i < s.activities.size(); ++i) {
        auto a = to_json(s.activities[i]);
        if (i < s.steps.size()) {
            a["evidence"] = s.steps[i].evidence;
            a["evidence_ignored"] = s.steps[i].evidence_ignored;
        }
        activities.push_back(std::move(a));
    }
    return json{{"session_id", s.session_id},
                {"user_id", s.user_id},
                {"slice", s.belief.slice},
                {"objective_catalog", s.objective_catalog},
                {"objective_posterior", objective},
                {"individual_characteristics", slots(s.individual_characteristics)},
                {"context", slots(s.context)},
                {"activities", activities}};
}

// ---------------------------------------------------------------------------

SessionStore::SessionStore(std::shared_ptr<const UserModel> model) : model_(std::move(model)) {
    validate_user_model(*model_);
}

std::string SessionStore::open_session(const std::string& user_id, const Profile& declared) {
    // Build the state outside the lock; profile errors leave no trace.
    auto state = new_user_state(*model_, "", user_id, declared);
    std::unique_lock lock(mu_);
    std::string id;
    do {
        char buf[32];
        std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(next_id_++));
        id = buf;
    } while (sessions_.contains(id));
    state.session_id = id;
    auto session = std::make_unique<Session>();
    session->state = std::move(state);
    sessions_.emplace(id, std::move(session));
    return id;
}

void SessionStore::open_session_with_id(const std::string& session_id, const std::string& user_id,
                                        const Profile& declared) {
    auto state = new_user_state(*model_, session_id, user_id, declared);
    std::unique_lock lock(mu_);
    if (sessions_.contains(session_id))
        throw Error(ErrorCode::invalid_event, "session '" + session_id + "' already exists", "session_id");
    auto session = std::make_unique<Session>();
    session->state = std::move(state);
    sessions_.emplace(session_id, std::move(session));
    // Keep generated ids clear of recovered ones.
    unsigned long long n = 0;
    if (std::sscanf(session_id.c_str(), "s%llu", &n) == 1 && n >= next_id_) next_id_ = n + 1;
}

SessionStore::Session& SessionStore::lookup(const std::string& session_id) const {
    std::shared_lock lock(mu_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end())
        throw Error(ErrorCode::not_found, "unknown session '" + session_id + "'", "session_id");
    return *it->second;
}

UserState SessionStore::record_activity(const std::string& session_id, ActivityEvent event,
                                        const corpus::CorpusIndex* corpus, const CommitHook& commit) {
    auto& s = lookup(session_id);
    std::lock_guard lock(s.mu);
    auto next = apply_activity(*model_, s.state, std::move(event), corpus);
    if (commit) commit(next);
    s.state = std::move(next);
    return s.state;
}

UserState SessionStore::get_user_state(const std::string& session_id) const {
    auto& s = lookup(session_id);
    std::lock_guard lock(s.mu);
    return s.state;
}

bool SessionStore::contains(const std::string& session_id) const {
    std::shared_lock lock(mu_);
    return sessions_.contains(session_id);
}

std::vector<std::string> SessionStore::session_ids() const {
    std::shared_lock lock(mu_);
    std::vector<std::string> out;
    for (const auto& [id, _] : sessions_) out.push_back(id);
    return out;
}

}  // namespace eis::user
