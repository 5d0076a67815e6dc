#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eis/corpus/index.hpp"
#include "eis/corpus/query.hpp"
#include "eis/exec.hpp"
#include "eis/user/session.hpp"
#include "eis/vendor_json.hpp"

namespace eis::adapt {

/// Probability distribution over the objective catalog.
struct Distribution {
    std::vector<std::string> catalog;
    std::vector<double> p;
    bool uninformative = false;

    bool operator==(const Distribution&) const = default;

    // Index of the most probable objective (first on ties).
    std::size_t argmax() const;
};

Distribution uniform(const std::vector<std::string>& catalog, bool uninformative = true);

// One conjunct of a template constraint. The value is fixed, read from a
// user slot, or (for year >=) derived from the reference year and horizon.
struct ConstraintPattern {
    enum class Source { fixed, slot, horizon };

    std::string attribute;
    corpus::CmpOp op = corpus::CmpOp::eq;
    Source source = Source::fixed;
    std::string value;  // fixed value, or slot name for Source::slot
};

struct ObjectiveTemplate {
    std::string objective_id;
    std::vector<ConstraintPattern> constraints;
    std::vector<std::string> expansion_terms;
    int horizon_years = 0;
};

struct AdaptationConfig {
    double lambda = 0.5;  // weight of the inferred objective in the fusion
    double alpha = 0.6;   // content_match weight in the score
    double theta = 0.1;   // inclusion threshold
    std::size_t top_k = 50;
    double tau = 0.4;     // activation threshold
    int horizon_years = 3;
    std::optional<int> reference_year;
    std::string summary_attribute = "venue_name";
    std::vector<ObjectiveTemplate> templates;

    const ObjectiveTemplate* find_template(const std::string& objective_id) const;
};

// Throws Error(config_error): weights outside [0,1], malformed patterns, or
// a catalog objective without exactly one template.
void validate_config(const AdaptationConfig& config, const std::vector<std::string>& catalog);

AdaptationConfig config_from_json(const nlohmann::json& j);
AdaptationConfig read_config_file(const std::string& path);
nlohmann::json to_json(const AdaptationConfig& c);

// Atom-level pattern match used by explicit_objectives.
bool pattern_matches(const ConstraintPattern& pattern, const corpus::BooleanQuery& atom);

/// Objectives stated by the user's queries. A query states a template when
/// every template conjunct appears as a non-negated atom of the query. All
/// stated objectives share the mass equally; none -> uniform, uninformative.
Distribution explicit_objectives(const std::vector<corpus::BooleanQuery>& history,
                                 const AdaptationConfig& config, const std::vector<std::string>& catalog);

/// lambda * p_dbn + (1 - lambda) * p_explicit, renormalised. lambda 1 and 0
/// return the respective input unchanged; an uninformative p_explicit
/// yields p_dbn. Throws Error(fusion_error) on mismatched catalogs.
Distribution fuse_objectives(const Distribution& p_dbn, const Distribution& p_explicit, double lambda);

// Template conjuncts instantiated for a user. Throws Error(adaptation_error)
// listing every slot the user state lacks.
std::vector<corpus::BooleanQuery> build_constraints(const ObjectiveTemplate& tmpl, const user::UserState& state,
                                                    int reference_year);

// Left-deep And / Or over a non-empty list.
corpus::BooleanQuery conjunction(const std::vector<corpus::BooleanQuery>& parts);
corpus::BooleanQuery disjunction(const std::vector<corpus::BooleanQuery>& parts);

struct AdaptedQuery {
    corpus::BooleanQuery original;
    corpus::BooleanQuery query;  // what is reported: original, or hard AND (original OR expansions)
    bool activated = false;
    std::string objective;       // winning objective (even when not activated)
    int reference_year = 0;
    std::vector<corpus::BooleanQuery> constraints;  // injected hard conjuncts
    std::vector<std::string> expansion_terms;

    std::optional<corpus::BooleanQuery> hard() const;
};

/// Conjoins the winning template's constraints (hard) and OR-expands the
/// query with its expansion terms (soft) when the fused maximum reaches tau;
/// otherwise returns q unchanged.
AdaptedQuery adapt_query(const corpus::BooleanQuery& q, const Distribution& fused, const user::UserState& state,
                         int reference_year, const AdaptationConfig& config);

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;
    double content_match = 0.0;
    double objective_relevance = 0.0;

    bool operator==(const ScoredDoc&) const = default;
};

using Summary = std::vector<std::pair<std::string, std::size_t>>;

/// The retrieved subset R.
struct ResultSet {
    std::vector<ScoredDoc> ranked;
    AdaptedQuery adapted;
    Distribution objective_used;
    Summary summary;
};

struct ScoringWeights {
    double content = 0.6;
    double objective = 0.4;
    double threshold = 0.1;
};

/// Scores candidates as content * content_match + objective * relevance,
/// keeps score >= threshold and returns at most top_k, best first, ties by
/// ascending doc_id. content_match is the fraction of `terms` present in the
/// document; relevance the fraction of `conjuncts` it satisfies (0 when
/// there are none).
std::vector<ScoredDoc> rank_candidates(const corpus::CorpusIndex& index, const corpus::OrdinalSet& candidates,
                                       const std::vector<std::string>& terms,
                                       const std::vector<corpus::BooleanQuery>& conjuncts, const ScoringWeights& w,
                                       std::size_t top_k, Exec exec = Exec::parallel);

// Normalised positive Term leaves of q (those not under an odd number of NOTs).
std::vector<std::string> positive_terms(const corpus::BooleanQuery& q);

// Reference year: config override, else the year of the latest activity,
// else the current UTC year.
int reference_year_for(const AdaptationConfig& config, const user::UserState& state);

/// R for a query in a session: explicit objectives from the query history
/// (plus q) fused with the DBN posterior, query adaptation, candidate
/// retrieval on the hard constraints, scoring and summary.
ResultSet compute_R(const corpus::CorpusIndex& index, const user::UserState& state, const corpus::BooleanQuery& q,
                    const AdaptationConfig& config, Exec exec = Exec::parallel);

// (value, count) over R, count descending then value ascending. Throws
// Error(summary_error) for an unknown attribute.
Summary summarize(const corpus::CorpusIndex& index, const ResultSet& r, const std::string& attribute);

nlohmann::json to_json(const ResultSet& r);

}  // namespace eis::adapt
