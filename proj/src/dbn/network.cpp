#include "eis/dbn/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "eis/error.hpp"

namespace eis::dbn {

const Variable* NetworkSpec::find(std::string_view name) const {
    for (const auto& v : variables)
        if (v.name == name) return &v;
    return nullptr;
}

const Cpt* NetworkSpec::find_cpt(std::string_view variable) const {
    for (const auto& c : cpts)
        if (c.variable == variable) return &c;
    return nullptr;
}

namespace {

void check_distribution(const std::vector<double>& row, std::size_t width, const std::string& subject,
                        std::vector<Violation>& out) {
    if (row.size() != width) {
        out.push_back({"row width", subject,
                       "expected " + std::to_string(width) + " entries, found " + std::to_string(row.size())});
        return;
    }
    double sum = 0.0;
    for (double p : row) {
        if (!std::isfinite(p) || p < 0.0) {
            out.push_back({"negative entry", subject, "entries must be finite and non-negative"});
            return;
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kRowTolerance)
        out.push_back({"unnormalized row", subject, "row sums to " + std::to_string(sum)});
}

bool has_cycle(const NetworkSpec& spec, std::string& witness) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& e : spec.intra_edges) adj[e.parent].push_back(e.child);
    std::map<std::string, int> colour;  // 0 white, 1 grey, 2 black
    std::function<bool(const std::string&)> visit = [&](const std::string& v) {
        colour[v] = 1;
        for (const auto& w : adj[v]) {
            if (colour[w] == 1) {
                witness = w;
                return true;
            }
            if (colour[w] == 0 && visit(w)) return true;
        }
        colour[v] = 2;
        return false;
    };
    for (const auto& [v, _] : adj)
        if (colour[v] == 0 && visit(v)) return true;
    return false;
}

}  // namespace

std::vector<Violation> validate_network(const NetworkSpec& spec) {
    std::vector<Violation> out;
    std::map<std::string, const Variable*> vars;

    for (const auto& v : spec.variables) {
        if (v.name.empty()) out.push_back({"invalid variable", "", "variable name is empty"});
        if (!vars.emplace(v.name, &v).second)
            out.push_back({"duplicate variable", v.name, "declared more than once"});
        if (v.domain.empty()) out.push_back({"empty domain", v.name, "domain has no values"});
        std::set<std::string> seen(v.domain.begin(), v.domain.end());
        if (seen.size() != v.domain.size())
            out.push_back({"duplicate value", v.name, "domain values must be distinct"});
        if (v.kind == VarKind::observed && v.dynamics == Dynamics::static_)
            out.push_back({"invalid dynamics", v.name, "observed variables are per-slice (temporal)"});
    }
    auto lookup = [&](const std::string& n) -> const Variable* {
        auto it = vars.find(n);
        return it == vars.end() ? nullptr : it->second;
    };

    std::map<std::string, std::set<std::pair<std::string, int>>> parents_of;
    auto check_edges = [&](const std::vector<Edge>& edges, int lag) {
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& e : edges) {
            const auto* p = lookup(e.parent);
            const auto* c = lookup(e.child);
            const auto subject = e.parent + "->" + e.child;
            if (!p || !c) {
                out.push_back({"unknown variable", subject, "edge endpoint is not declared"});
                continue;
            }
            if (!seen.emplace(e.parent, e.child).second)
                out.push_back({"duplicate edge", subject, "edge listed twice"});
            if (p->kind != VarKind::hidden)
                out.push_back({"invalid edge", subject, "observed variables cannot be parents"});
            if (c->kind == VarKind::hidden && c->dynamics == Dynamics::static_)
                out.push_back({"invalid edge", subject, "static variables have no parents"});
            if (lag == 1 && c->kind == VarKind::observed)
                out.push_back({"invalid edge", subject, "observed variables take same-slice parents only"});
            parents_of[e.child].emplace(e.parent, lag);
        }
    };
    check_edges(spec.intra_edges, 0);
    check_edges(spec.inter_edges, 1);

    std::string witness;
    if (has_cycle(spec, witness))
        out.push_back({"cycle", witness, "intra-slice edges form a cycle through '" + witness + "'"});

    std::set<std::string> with_cpt;
    for (const auto& cpt : spec.cpts) {
        const auto* v = lookup(cpt.variable);
        if (!v) {
            out.push_back({"unknown variable", cpt.variable, "CPT for an undeclared variable"});
            continue;
        }
        if (!with_cpt.insert(cpt.variable).second) {
            out.push_back({"duplicate cpt", cpt.variable, "more than one CPT"});
            continue;
        }
        if (v->kind == VarKind::hidden && v->dynamics == Dynamics::static_) {
            out.push_back({"unexpected cpt", cpt.variable, "static variables use their prior only"});
            continue;
        }
        std::set<std::pair<std::string, int>> declared;
        std::size_t rows = 1;
        bool parents_ok = true;
        for (const auto& p : cpt.parents) {
            const auto* pv = lookup(p.name);
            if (!pv || (p.lag != 0 && p.lag != 1)) {
                out.push_back({"unknown parent", cpt.variable,
                               "parent '" + p.name + "' (lag " + std::to_string(p.lag) + ") does not exist"});
                parents_ok = false;
                continue;
            }
            declared.emplace(p.name, p.lag);
            rows *= pv->domain.size();
        }
        if (!parents_ok) continue;
        if (declared != parents_of[cpt.variable] || declared.size() != cpt.parents.size()) {
            out.push_back({"parent mismatch", cpt.variable, "CPT parents differ from the declared edges"});
            continue;
        }
        if (cpt.rows.size() != rows) {
            out.push_back({"row count", cpt.variable,
                           "expected " + std::to_string(rows) + " rows, found " + std::to_string(cpt.rows.size())});
            continue;
        }
        for (std::size_t r = 0; r < rows; ++r)
            check_distribution(cpt.rows[r], v->domain.size(), cpt.variable + "[" + std::to_string(r) + "]", out);
    }
    for (const auto& v : spec.variables) {
        const bool needs_cpt = v.kind == VarKind::observed || v.dynamics == Dynamics::temporal;
        if (needs_cpt && !with_cpt.contains(v.name))
            out.push_back({"missing cpt", v.name, "no CPT declared"});
        if (v.kind == VarKind::hidden) {
            auto it = spec.priors.find(v.name);
            if (it == spec.priors.end())
                out.push_back({"missing prior", v.name, "hidden variables need a slice-0 prior"});
            else
                check_distribution(it->second, v.domain.size(), v.name + "[prior]", out);
        }
    }
    for (const auto& [name, _] : spec.priors) {
        const auto* v = lookup(name);
        if (!v || v->kind != VarKind::hidden)
            out.push_back({"unexpected prior", name, "priors apply to hidden variables only"});
    }
    return out;
}

Network::Network(NetworkSpec spec) : spec_(std::move(spec)) {
    const auto violations = validate_network(spec_);
    if (!violations.empty()) {
        std::string msg = "invalid network:";
        for (const auto& v : violations) msg += " [" + v.kind + "] " + v.subject + ": " + v.message + ";";
        throw Error(ErrorCode::invalid_spec, msg, violations.front().subject);
    }

    const auto n = spec_.variables.size();
    hidden_pos_.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        by_name_.emplace(spec_.variables[i].name, i);
        if (spec_.variables[i].kind == VarKind::hidden) {
            hidden_pos_[i] = static_cast<std::ptrdiff_t>(hidden_.size());
            hidden_.push_back(i);
        }
    }
    radices_.resize(hidden_.size());
    strides_.resize(hidden_.size());
    for (std::size_t h = hidden_.size(); h-- > 0;) {
        radices_[h] = spec_.variables[hidden_[h]].domain.size();
        strides_[h] = joint_size_;
        joint_size_ *= radices_[h];
    }

    cpt_slot_.assign(n, -1);
    for (const auto& cpt : spec_.cpts) {
        CompiledCpt c;
        c.variable = by_name_.at(cpt.variable);
        std::size_t mult = 1;
        c.parent_stride.resize(cpt.parents.size());
        for (std::size_t k = cpt.parents.size(); k-- > 0;) {
            c.parent_stride[k] = mult;
            mult *= spec_.variables[by_name_.at(cpt.parents[k].name)].domain.size();
        }
        for (const auto& p : cpt.parents) {
            c.parent_hidden.push_back(static_cast<std::size_t>(hidden_pos_[by_name_.at(p.name)]));
            c.parent_lag.push_back(p.lag);
        }
        c.rows = cpt.rows;
        c.log_rows = cpt.rows;
        for (auto& row : c.log_rows)
            for (auto& p : row) p = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
        cpt_slot_[c.variable] = static_cast<std::ptrdiff_t>(cpts_.size());
        cpts_.push_back(std::move(c));
    }
}

std::optional<std::size_t> Network::variable_index(std::string_view name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> Network::value_index(std::size_t var, std::string_view value) const {
    const auto& d = spec_.variables.at(var).domain;
    auto it = std::find(d.begin(), d.end(), value);
    if (it == d.end()) return std::nullopt;
    return static_cast<std::size_t>(it - d.begin());
}

std::optional<std::size_t> Network::hidden_position(std::size_t var) const {
    if (var >= hidden_pos_.size() || hidden_pos_[var] < 0) return std::nullopt;
    return static_cast<std::size_t>(hidden_pos_[var]);
}

std::vector<std::pair<std::size_t, std::size_t>> Network::resolve(const Evidence& e) const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& [name, value] : e) {
        auto var = variable_index(name);
        if (!var) throw Error(ErrorCode::evidence_error, "unknown evidence variable '" + name + "'", name);
        auto val = value_index(*var, value);
        if (!val)
            throw Error(ErrorCode::evidence_error,
                        "value '" + value + "' is outside the domain of '" + name + "'", name);
        out.emplace_back(*var, *val);
    }
    return out;
}

std::size_t Network::CompiledCpt::row_of(const Network& net, std::size_t prev, std::size_t cur) const {
    std::size_t row = 0;
    for (std::size_t k = 0; k < parent_hidden.size(); ++k) {
        const auto state = parent_lag[k] == 1 ? prev : cur;
        row += net.hidden_value(state, parent_hidden[k]) * parent_stride[k];
    }
    return row;
}

}  // namespace eis::dbn
