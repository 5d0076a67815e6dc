#include "eis/adapt/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <map>
#include <set>

#include "eis/error.hpp"
#include "eis/text.hpp"

namespace eis::adapt {

using corpus::BooleanQuery;
using Kind = corpus::BooleanQuery::Kind;

std::size_t Distribution::argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
        if (p[i] > p[best]) best = i;
    return best;
}

Distribution uniform(const std::vector<std::string>& catalog, bool uninformative) {
    Distribution d;
    d.catalog = catalog;
    d.p.assign(catalog.size(), catalog.empty() ? 0.0 : 1.0 / static_cast<double>(catalog.size()));
    d.uninformative = uninformative;
    return d;
}

const ObjectiveTemplate* AdaptationConfig::find_template(const std::string& objective_id) const {
    for (const auto& t : templates)
        if (t.objective_id == objective_id) return &t;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Config

void validate_config(const AdaptationConfig& c, const std::vector<std::string>& catalog) {
    auto unit = [](double x, const char* name) {
        if (!(x >= 0.0 && x <= 1.0))
            throw Error(ErrorCode::config_error, std::string(name) + " must lie in [0, 1]", name);
    };
    unit(c.lambda, "lambda");
    unit(c.alpha, "alpha");
    unit(c.theta, "theta");
    unit(c.tau, "tau");
    if (!corpus::parse_attribute(c.summary_attribute))
        throw Error(ErrorCode::config_error, "unknown summary attribute '" + c.summary_attribute + "'",
                    "summary_attribute");
    std::map<std::string, int> seen;
    for (const auto& t : c.templates) {
        ++seen[t.objective_id];
        for (const auto& p : t.constraints) {
            auto a = corpus::parse_attribute(p.attribute);
            if (!a)
                throw Error(ErrorCode::config_error,
                            "template '" + t.objective_id + "': unknown attribute '" + p.attribute + "'", t.objective_id);
            const bool is_year = *a == corpus::Attribute::year;
            if (p.op != corpus::CmpOp::eq && !is_year)
                throw Error(ErrorCode::config_error,
                            "template '" + t.objective_id + "': comparisons apply to year only", t.objective_id);
            if (p.source == ConstraintPattern::Source::horizon && !is_year)
                throw Error(ErrorCode::config_error,
                            "template '" + t.objective_id + "': horizon applies to year only", t.objective_id);
            if (p.source != ConstraintPattern::Source::horizon && p.value.empty())
                throw Error(ErrorCode::config_error,
                            "template '" + t.objective_id + "': constraint on '" + p.attribute + "' has no value",
                            t.objective_id);
            if (p.source == ConstraintPattern::Source::fixed && is_year) {
                try {
                    std::size_t pos = 0;
                    (void)std::stoll(p.value, &pos);
                    if (pos != p.value.size()) throw std::invalid_argument("trailing");
                } catch (const std::exception&) {
                    throw Error(ErrorCode::config_error,
                                "template '" + t.objective_id + "': year value must be an integer", t.objective_id);
                }
            }
        }
    }
    for (const auto& o : catalog)
        if (seen[o] != 1)
            throw Error(ErrorCode::config_error,
                        "objective '" + o + "' needs exactly one template (found " + std::to_string(seen[o]) + ")", o);
    for (const auto& [o, _] : seen)
        if (std::find(catalog.begin(), catalog.end(), o) == catalog.end())
            throw Error(ErrorCode::config_error, "template for unknown objective '" + o + "'", o);
}

AdaptationConfig config_from_json(const nlohmann::json& j) {
    AdaptationConfig c;
    try {
        c.lambda = j.value("lambda", c.lambda);
        c.alpha = j.value("alpha", c.alpha);
        c.theta = j.value("theta", c.theta);
        c.top_k = j.value("top_k", c.top_k);
        c.tau = j.value("tau", c.tau);
        c.horizon_years = j.value("horizon_years", c.horizon_years);
        if (auto it = j.find("reference_year"); it != j.end() && !it->is_null()) c.reference_year = it->get<int>();
        c.summary_attribute = j.value("summary_attribute", c.summary_attribute);
        for (const auto& t : j.value("templates", nlohmann::json::array())) {
            ObjectiveTemplate tmpl;
            tmpl.objective_id = t.at("objective").get<std::string>();
            tmpl.horizon_years = t.value("horizon_years", c.horizon_years);
            tmpl.expansion_terms = t.value("expansion_terms", std::vector<std::string>{});
            for (const auto& p : t.value("constraints", nlohmann::json::array())) {
                ConstraintPattern pat;
                pat.attribute = p.at("attribute").get<std::string>();
                const auto op = p.value("op", std::string("="));
                if (op == "=") pat.op = corpus::CmpOp::eq;
                else if (op == ">=") pat.op = corpus::CmpOp::ge;
                else if (op == "<=") pat.op = corpus::CmpOp::le;
                else throw Error(ErrorCode::config_error, "unknown operator '" + op + "'", tmpl.objective_id);
                if (p.value("horizon", false)) {
                    pat.source = ConstraintPattern::Source::horizon;
                } else if (auto s = p.find("slot"); s != p.end()) {
                    pat.source = ConstraintPattern::Source::slot;
                    pat.value = s->get<std::string>();
                } else {
                    const auto& v = p.at("value");
                    pat.value = v.is_string() ? v.get<std::string>() : v.dump();
                }
                tmpl.constraints.push_back(std::move(pat));
            }
            c.templates.push_back(std::move(tmpl));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::config_error, std::string("adaptation config: ") + e.what());
    }
    return c;
}

AdaptationConfig read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open adaptation config '" + path + "'", path);
    try {
        return config_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::config_error, "adaptation config '" + path + "': " + e.what(), path);
    }
}

nlohmann::json to_json(const AdaptationConfig& c) {
    using nlohmann::json;
    json templates = json::array();
    for (const auto& t : c.templates) {
        json cons = json::array();
        for (const auto& p : t.constraints) {
            json pj{{"attribute", p.attribute}, {"op", corpus::to_string(p.op)}};
            switch (p.source) {
            case ConstraintPattern::Source::fixed: pj["value"] = p.value; break;
            case ConstraintPattern::Source::slot: pj["slot"] = p.value; break;
            case ConstraintPattern::Source::horizon: pj["horizon"] = true; break;
            }
            cons.push_back(std::move(pj));
        }
        templates.push_back({{"objective", t.objective_id},
                             {"constraints", cons},
                             {"expansion_terms", t.expansion_terms},
                             {"horizon_years", t.horizon_years}});
    }
    json j{{"lambda", c.lambda},   {"alpha", c.alpha}, {"theta", c.theta},
           {"top_k", c.top_k},     {"tau", c.tau},     {"horizon_years", c.horizon_years},
           {"summary_attribute", c.summary_attribute}, {"templates", templates}};
    j["reference_year"] = c.reference_year ? json(*c.reference_year) : json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------
// Explicit objectives and fusion

namespace {

void collect_atoms(const BooleanQuery& q, bool positive, std::vector<const BooleanQuery*>& out) {
    switch (q.kind()) {
    case Kind::term:
    case Kind::attr_eq:
    case Kind::attr_cmp:
        if (positive) out.push_back(&q);
        break;
    case Kind::and_:
    case Kind::or_:
        collect_atoms(q.lhs(), positive, out);
        collect_atoms(q.rhs(), positive, out);
        break;
    case Kind::not_: collect_atoms(q.operand(), !positive, out); break;
    }
}

bool states_template(const ObjectiveTemplate& t, const BooleanQuery& q) {
    if (t.constraints.empty()) return false;
    std::vector<const BooleanQuery*> atoms;
    collect_atoms(q, true, atoms);
    return std::all_of(t.constraints.begin(), t.constraints.end(), [&](const ConstraintPattern& p) {
        return std::any_of(atoms.begin(), atoms.end(), [&](const BooleanQuery* a) { return pattern_matches(p, *a); });
    });
}

bool same_pattern(const ConstraintPattern& a, const ConstraintPattern& b) {
    return a.attribute == b.attribute && a.op == b.op && a.source == b.source &&
           (a.source != ConstraintPattern::Source::fixed || text::fold_case(a.value) == text::fold_case(b.value));
}

// a's patterns are a strict subset of b's.
bool strictly_weaker(const ObjectiveTemplate& a, const ObjectiveTemplate& b) {
    if (a.constraints.size() >= b.constraints.size()) return false;
    return std::all_of(a.constraints.begin(), a.constraints.end(), [&](const ConstraintPattern& p) {
        return std::any_of(b.constraints.begin(), b.constraints.end(),
                           [&](const ConstraintPattern& q) { return same_pattern(p, q); });
    });
}

}  // namespace

bool pattern_matches(const ConstraintPattern& p, const BooleanQuery& atom) {
    if (atom.kind() != Kind::attr_eq && atom.kind() != Kind::attr_cmp) return false;
    if (atom.attribute() != p.attribute) return false;
    const auto atom_op = atom.kind() == Kind::attr_eq ? corpus::CmpOp::eq : atom.op();
    if (atom_op != p.op) return false;
    switch (p.source) {
    case ConstraintPattern::Source::slot:
    case ConstraintPattern::Source::horizon: return true;
    case ConstraintPattern::Source::fixed:
        if (atom.kind() == Kind::attr_cmp) return std::to_string(atom.number()) == p.value;
        return text::fold_case(atom.value()) == text::fold_case(p.value);
    }
    return false;
}

Distribution explicit_objectives(const std::vector<BooleanQuery>& history, const AdaptationConfig& config,
                                 const std::vector<std::string>& catalog) {
    std::vector<const ObjectiveTemplate*> templates;
    for (const auto& id : catalog) templates.push_back(config.find_template(id));

    std::vector<bool> stated(catalog.size(), false);
    for (const auto& q : history) {
        std::vector<std::size_t> hit;
        for (std::size_t i = 0; i < templates.size(); ++i)
            if (templates[i] && states_template(*templates[i], q)) hit.push_back(i);
        // Only the most specific templates a query states count for it.
        for (auto i : hit) {
            const bool subsumed = std::any_of(hit.begin(), hit.end(), [&](std::size_t j) {
                return j != i && strictly_weaker(*templates[i], *templates[j]);
            });
            if (!subsumed) stated[i] = true;
        }
    }
    const auto count = static_cast<std::size_t>(std::count(stated.begin(), stated.end(), true));
    if (count == 0) return uniform(catalog, true);
    Distribution d;
    d.catalog = catalog;
    d.p.assign(catalog.size(), 0.0);
    for (std::size_t i = 0; i < catalog.size(); ++i)
        if (stated[i]) d.p[i] = 1.0 / static_cast<double>(count);
    return d;
}

Distribution fuse_objectives(const Distribution& p_dbn, const Distribution& p_explicit, double lambda) {
    if (p_dbn.catalog != p_explicit.catalog || p_dbn.p.size() != p_dbn.catalog.size() ||
        p_explicit.p.size() != p_explicit.catalog.size())
        throw Error(ErrorCode::fusion_error, "distributions are over different objective catalogs");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorCode::fusion_error, "lambda must lie in [0, 1]", "lambda");
    if (p_explicit.uninformative || lambda == 1.0) return p_dbn;
    if (lambda == 0.0) return p_explicit;
    Distribution out;
    out.catalog = p_dbn.catalog;
    out.p.resize(p_dbn.p.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < out.p.size(); ++i) {
        out.p[i] = lambda * p_dbn.p[i] + (1.0 - lambda) * p_explicit.p[i];
        sum += out.p[i];
    }
    for (double& x : out.p) x /= sum;
    out.uninformative = p_dbn.uninformative && p_explicit.uninformative;
    return out;
}

// ---------------------------------------------------------------------------
// Query adaptation

BooleanQuery conjunction(const std::vector<BooleanQuery>& parts) {
    BooleanQuery q = parts.at(0);
    for (std::size_t i = 1; i < parts.size(); ++i) q = BooleanQuery::conj(std::move(q), parts[i]);
    return q;
}

BooleanQuery disjunction(const std::vector<BooleanQuery>& parts) {
    BooleanQuery q = parts.at(0);
    for (std::size_t i = 1; i < parts.size(); ++i) q = BooleanQuery::disj(std::move(q), parts[i]);
    return q;
}

std::vector<BooleanQuery> build_constraints(const ObjectiveTemplate& t, const user::UserState& state,
                                            int reference_year) {
    std::vector<BooleanQuery> out;
    std::vector<std::string> missing;
    for (const auto& p : t.constraints) {
        switch (p.source) {
        case ConstraintPattern::Source::fixed:
            if (p.attribute == "year")
                out.push_back(BooleanQuery::attr_cmp(p.attribute, p.op, std::stoll(p.value)));
            else
                out.push_back(BooleanQuery::attr_eq(p.attribute, p.value));
            break;
        case ConstraintPattern::Source::horizon:
            out.push_back(BooleanQuery::attr_cmp(p.attribute, p.op, reference_year - t.horizon_years));
            break;
        case ConstraintPattern::Source::slot: {
            const user::SlotValue* v = nullptr;
            if (auto it = state.individual_characteristics.find(p.value); it != state.individual_characteristics.end())
                v = &it->second;
            else if (auto ct = state.context.find(p.value); ct != state.context.end())
                v = &ct->second;
            if (!v || v->value.empty()) {
                missing.push_back(p.value);
            } else if (p.attribute == "year") {
                try {
                    out.push_back(BooleanQuery::attr_cmp(p.attribute, p.op, std::stoll(v->value)));
                } catch (const std::exception&) {
                    missing.push_back(p.value);
                }
            } else {
                out.push_back(BooleanQuery::attr_eq(p.attribute, v->value));
            }
            break;
        }
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw Error(ErrorCode::adaptation_error,
                    "objective '" + t.objective_id + "' needs profile slots: " + list, list);
    }
    return out;
}

std::optional<BooleanQuery> AdaptedQuery::hard() const {
    if (!activated || constraints.empty()) return std::nullopt;
    return conjunction(constraints);
}

AdaptedQuery adapt_query(const BooleanQuery& q, const Distribution& fused, const user::UserState& state,
                         int reference_year, const AdaptationConfig& config) {
    AdaptedQuery a;
    a.original = q;
    a.query = q;
    a.reference_year = reference_year;
    if (fused.p.empty()) return a;
    const auto win = fused.argmax();
    a.objective = fused.catalog[win];
    if (fused.p[win] < config.tau) return a;

    const auto* t = config.find_template(a.objective);
    if (!t) throw Error(ErrorCode::adaptation_error, "no template for objective '" + a.objective + "'", a.objective);
    a.constraints = build_constraints(*t, state, reference_year);
    a.expansion_terms = t->expansion_terms;
    a.activated = true;
    if (a.constraints.empty()) return a;

    std::vector<BooleanQuery> soft{q};
    for (const auto& term : t->expansion_terms) {
        auto norm = text::normalize_term(term);
        if (!norm.empty()) soft.push_back(BooleanQuery::term(std::move(norm)));
    }
    a.query = BooleanQuery::conj(conjunction(a.constraints), disjunction(soft));
    return a;
}

// ---------------------------------------------------------------------------
// Scoring

std::vector<std::string> positive_terms(const BooleanQuery& q) {
    std::vector<const BooleanQuery*> atoms;
    collect_atoms(q, true, atoms);
    std::vector<std::string> out;
    for (const auto* a : atoms)
        if (a->kind() == Kind::term) {
            auto t = text::normalize_term(a->text());
            if (!t.empty()) out.push_back(std::move(t));
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

// Scores are kept to 12 decimals so mathematically equal scores tie exactly.
double quantize(double x) { return std::round(x * 1e12) / 1e12; }

}  // namespace

std::vector<ScoredDoc> rank_candidates(const corpus::CorpusIndex& index, const corpus::OrdinalSet& candidates,
                                       const std::vector<std::string>& terms,
                                       const std::vector<BooleanQuery>& conjuncts, const ScoringWeights& w,
                                       std::size_t top_k, Exec exec) {
    std::vector<ScoredDoc> scored(candidates.size());
    const bool parallel = exec == Exec::parallel;

#pragma omp parallel for schedule(dynamic, 32) if (parallel)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(candidates.size()); ++i) {
        const auto& doc = index.at(candidates[static_cast<std::size_t>(i)]);
        ScoredDoc s;
        s.doc_id = doc.doc_id;
        if (!terms.empty()) {
            const auto doc_terms = corpus::document_terms(doc);
            std::size_t hit = 0;
            for (const auto& t : terms)
                if (std::binary_search(doc_terms.begin(), doc_terms.end(), t)) ++hit;
            s.content_match = static_cast<double>(hit) / static_cast<double>(terms.size());
        }
        if (!conjuncts.empty()) {
            std::size_t ok = 0;
            for (const auto& c : conjuncts)
                if (corpus::matches(doc, c)) ++ok;
            s.objective_relevance = ok == conjuncts.size() ? 1.0 : static_cast<double>(ok) / static_cast<double>(conjuncts.size());
        }
        s.score = quantize(w.content * s.content_match + w.objective * s.objective_relevance);
        scored[static_cast<std::size_t>(i)] = std::move(s);
    }

    const double threshold = quantize(w.threshold);
    std::erase_if(scored, [&](const ScoredDoc& s) { return s.score < threshold; });
    std::stable_sort(scored.begin(), scored.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    if (scored.size() > top_k) scored.resize(top_k);
    return scored;
}

int reference_year_for(const AdaptationConfig& config, const user::UserState& state) {
    if (config.reference_year) return *config.reference_year;
    if (!state.activities.empty()) return user::year_of(state.activities.back().timestamp);
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    return tm.tm_year + 1900;
}

ResultSet compute_R(const corpus::CorpusIndex& index, const user::UserState& state, const BooleanQuery& q,
                    const AdaptationConfig& config, Exec exec) {
    std::vector<BooleanQuery> history;
    for (const auto& a : state.activities) {
        if (a.kind != user::ActivityKind::query_issued || !a.text) continue;
        try {
            history.push_back(corpus::parse_query(*a.text));
        } catch (const Error&) {
            // free-text queries that do not parse state no objective
        }
    }
    history.push_back(q);

    Distribution p_dbn;
    p_dbn.catalog = state.objective_catalog;
    p_dbn.p = state.objective_posterior;
    const auto p_explicit = explicit_objectives(history, config, state.objective_catalog);

    ResultSet r;
    r.objective_used = fuse_objectives(p_dbn, p_explicit, config.lambda);
    r.adapted = adapt_query(q, r.objective_used, state, reference_year_for(config, state), config);

    const auto hard = r.adapted.hard();
    const auto candidates = corpus::evaluate(index, hard ? *hard : q);

    auto terms = positive_terms(q);
    std::vector<BooleanQuery> conjuncts;
    if (r.adapted.activated) {
        for (const auto& t : r.adapted.expansion_terms) {
            auto norm = text::normalize_term(t);
            if (!norm.empty()) terms.push_back(std::move(norm));
        }
        std::sort(terms.begin(), terms.end());
        terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
        conjuncts = r.adapted.constraints;
    } else if (!r.adapted.objective.empty()) {
        if (const auto* t = config.find_template(r.adapted.objective)) {
            try {
                conjuncts = build_constraints(*t, state, r.adapted.reference_year);
            } catch (const Error&) {
                // below the activation threshold a non-buildable template just
                // contributes no objective relevance
            }
        }
    }

    const ScoringWeights w{config.alpha, 1.0 - config.alpha, config.theta};
    r.ranked = rank_candidates(index, candidates, terms, conjuncts, w, config.top_k, exec);
    r.summary = summarize(index, r, config.summary_attribute);
    return r;
}

Summary summarize(const corpus::CorpusIndex& index, const ResultSet& r, const std::string& attribute) {
    const auto attr = corpus::parse_attribute(attribute);
    if (!attr) throw Error(ErrorCode::summary_error, "unknown attribute '" + attribute + "'", attribute);
    std::map<std::string, std::size_t> counts;
    for (const auto& s : r.ranked) {
        const auto* doc = index.find(s.doc_id);
        if (!doc) throw Error(ErrorCode::summary_error, "result '" + s.doc_id + "' is not in the index", s.doc_id);
        std::set<std::string> values;
        switch (*attr) {
        case corpus::Attribute::author: values.insert(doc->authors.begin(), doc->authors.end()); break;
        case corpus::Attribute::venue_name: values.insert(doc->venue_name); break;
        case corpus::Attribute::venue_type: values.insert(std::string(corpus::to_string(doc->venue_type))); break;
        case corpus::Attribute::year: values.insert(std::to_string(doc->year)); break;
        case corpus::Attribute::team: values.insert(doc->team_ids.begin(), doc->team_ids.end()); break;
        }
        for (const auto& v : values) ++counts[v];
    }
    Summary out(counts.begin(), counts.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

nlohmann::json to_json(const ResultSet& r) {
    using nlohmann::json;
    json results = json::array();
    for (const auto& s : r.ranked)
        results.push_back({{"doc_id", s.doc_id},
                           {"score", s.score},
                           {"content_match", s.content_match},
                           {"objective_relevance", s.objective_relevance}});
    json objective = json::object();
    for (std::size_t i = 0; i < r.objective_used.catalog.size(); ++i)
        objective[r.objective_used.catalog[i]] = r.objective_used.p[i];
    json summary = json::array();
    for (const auto& [k, n] : r.summary) summary.push_back({k, n});
    const auto hard = r.adapted.hard();
    return json{{"results", results},
                {"adapted_query", corpus::render(r.adapted.query)},
                {"hard_constraints", hard ? json(corpus::render(*hard)) : json(nullptr)},
                {"activated", r.adapted.activated},
                {"objective", r.adapted.objective},
                {"reference_year", r.adapted.reference_year},
                {"objective_used", objective},
                {"summary", summary}};
}

}  // namespace eis::adapt
