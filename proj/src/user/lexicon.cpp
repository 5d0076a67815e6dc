#include "eis/user/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "eis/corpus/document.hpp"
#include "eis/error.hpp"
#include "eis/text.hpp"

namespace eis::user {

std::size_t count_hits(const LexiconEntry& entry, const std::vector<std::string>& words) {
    std::size_t hits = 0;
    for (const auto& kw : entry.keywords) {
        const auto phrase = text::words(kw);
        if (phrase.empty()) continue;
        if (std::search(words.begin(), words.end(), phrase.begin(), phrase.end()) != words.end()) ++hits;
    }
    return hits;
}

dbn::Evidence extract_evidence(const ActivityEvent& event, const std::vector<EvidenceLexicon>& lexicons,
                               const corpus::Document* clicked) {
    std::string source;
    if (event.kind == ActivityKind::result_clicked && clicked) {
        source = clicked->title + " " + clicked->venue_name + " " + std::string(corpus::to_string(clicked->venue_type));
        for (const auto& k : clicked->keywords) source += " " + k;
    } else if (event.text) {
        source = *event.text;
    }
    dbn::Evidence out;
    if (source.empty()) return out;
    const auto words = text::words(source);

    // variable -> value -> best hit count among qualifying entries
    std::map<std::string, std::map<std::string, std::size_t>> votes;
    for (const auto& lex : lexicons) {
        for (const auto& entry : lex.entries) {
            const auto hits = count_hits(entry, words);
            if (hits == 0 || hits < entry.min_hits) continue;
            auto& best = votes[entry.variable][entry.value];
            best = std::max(best, hits);
        }
    }
    for (const auto& [variable, by_value] : votes) {
        std::size_t top = 0;
        std::size_t at_top = 0;
        const std::string* winner = nullptr;
        for (const auto& [value, hits] : by_value) {
            if (hits > top) {
                top = hits;
                at_top = 1;
                winner = &value;
            } else if (hits == top) {
                ++at_top;
            }
        }
        if (winner && at_top == 1) out[variable] = *winner;
    }
    return out;
}

const SlotBinding* UserModel::binding(const std::string& slot) const {
    for (const auto& b : slots)
        if (b.slot == slot) return &b;
    return nullptr;
}

void validate_user_model(const UserModel& m) {
    if (!m.network) throw Error(ErrorCode::config_error, "user model has no network");
    const auto& net = *m.network;
    auto obj = net.variable_index(m.objective_variable);
    if (!obj || !net.hidden_position(*obj))
        throw Error(ErrorCode::config_error, "objective variable '" + m.objective_variable + "' is not hidden",
                    m.objective_variable);
    for (const auto& lex : m.lexicons) {
        for (const auto& e : lex.entries) {
            auto var = net.variable_index(e.variable);
            if (!var) throw Error(ErrorCode::config_error, "lexicon targets unknown variable '" + e.variable + "'", e.variable);
            if (!net.value_index(*var, e.value))
                throw Error(ErrorCode::config_error,
                            "lexicon value '" + e.value + "' is outside the domain of '" + e.variable + "'", e.variable);
            if (e.keywords.empty())
                throw Error(ErrorCode::config_error, "lexicon entry for '" + e.variable + "' has no keywords", e.variable);
        }
    }
    for (const auto& b : m.slots) {
        if (b.variable.empty()) continue;  // stored only, never clamped
        auto var = net.variable_index(b.variable);
        if (!var || !net.hidden_position(*var))
            throw Error(ErrorCode::config_error, "slot '" + b.slot + "' must bind a hidden variable", b.slot);
    }
}

UserModel user_model_from_json(const nlohmann::json& j, std::shared_ptr<const dbn::Network> network) {
    UserModel m;
    m.network = std::move(network);
    try {
        m.objective_variable = j.value("objective_variable", std::string("objective"));
        m.click_features = j.value("click_features", false);
        for (const auto& s : j.value("slots", nlohmann::json::array())) {
            SlotBinding b;
            b.slot = s.at("slot").get<std::string>();
            b.variable = s.value("variable", std::string());
            const auto cat = s.value("category", std::string("individual_characteristics"));
            if (cat == "individual_characteristics") b.category = SlotCategory::individual_characteristics;
            else if (cat == "context") b.category = SlotCategory::context;
            else throw Error(ErrorCode::config_error, "slot '" + b.slot + "': unknown category '" + cat + "'", b.slot);
            m.slots.push_back(std::move(b));
        }
        for (const auto& l : j.at("lexicons")) {
            EvidenceLexicon lex;
            lex.variable = l.at("variable").get<std::string>();
            for (const auto& e : l.at("entries")) {
                LexiconEntry entry;
                entry.variable = e.value("variable", lex.variable);
                entry.value = e.at("value").get<std::string>();
                entry.keywords = e.at("keywords").get<std::vector<std::string>>();
                entry.min_hits = e.value("min_hits", std::size_t{1});
                lex.entries.push_back(std::move(entry));
            }
            m.lexicons.push_back(std::move(lex));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::config_error, std::string("lexicon config: ") + e.what());
    }
    validate_user_model(m);
    return m;
}

UserModel read_user_model_file(const std::string& path, std::shared_ptr<const dbn::Network> network) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open lexicon config '" + path + "'", path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::config_error, "lexicon config '" + path + "': " + e.what(), path);
    }
    return user_model_from_json(j, std::move(network));
}

}  // namespace eis::user
