#include "eis/dbn/learning.hpp"

#include <algorithm>

#include "eis/error.hpp"

namespace eis::dbn {

CountTable CountTable::uniform(const Network& net, double alpha) {
    if (!(alpha > 0.0)) throw Error(ErrorCode::case_error, "pseudo-counts must be positive");
    CountTable t;
    for (const auto& cpt : net.spec().cpts) {
        auto& rows = t.counts_[cpt.variable];
        for (const auto& r : cpt.rows) rows.emplace_back(r.size(), alpha);
    }
    return t;
}

CountTable CountTable::from_cpts(const Network& net, double ess, double min_count) {
    if (!(ess > 0.0) || !(min_count > 0.0)) throw Error(ErrorCode::case_error, "pseudo-counts must be positive");
    CountTable t;
    for (const auto& cpt : net.spec().cpts) {
        auto& rows = t.counts_[cpt.variable];
        for (const auto& r : cpt.rows) {
            std::vector<double> c(r.size());
            for (std::size_t k = 0; k < r.size(); ++k) c[k] = std::max(ess * r[k], min_count);
            rows.push_back(std::move(c));
        }
    }
    return t;
}

CountTable CountTable::from_counts(const Network& net, std::map<std::string, std::vector<std::vector<double>>> counts) {
    for (const auto& cpt : net.spec().cpts) {
        auto it = counts.find(cpt.variable);
        if (it == counts.end()) throw Error(ErrorCode::case_error, "no counts for '" + cpt.variable + "'", cpt.variable);
        if (it->second.size() != cpt.rows.size())
            throw Error(ErrorCode::case_error, "row count mismatch for '" + cpt.variable + "'", cpt.variable);
        for (std::size_t r = 0; r < cpt.rows.size(); ++r) {
            const auto& row = it->second[r];
            if (row.size() != cpt.rows[r].size() ||
                std::any_of(row.begin(), row.end(), [](double c) { return !(c > 0.0); }))
                throw Error(ErrorCode::case_error,
                            "counts for '" + cpt.variable + "' row " + std::to_string(r) + " must be positive",
                            cpt.variable);
        }
    }
    if (counts.size() != net.spec().cpts.size())
        throw Error(ErrorCode::case_error, "counts name a variable without a CPT");
    CountTable t;
    t.counts_ = std::move(counts);
    return t;
}

const std::vector<double>& CountTable::row(std::string_view variable, std::size_t row) const {
    auto it = counts_.find(std::string(variable));
    if (it == counts_.end())
        throw Error(ErrorCode::case_error, "no counts for '" + std::string(variable) + "'", std::string(variable));
    return it->second.at(row);
}

std::vector<double> CountTable::cpt_row(std::string_view variable, std::size_t r) const {
    const auto& c = row(variable, r);
    double sum = 0.0;
    for (double x : c) sum += x;
    std::vector<double> out(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) out[k] = c[k] / sum;
    return out;
}

NetworkSpec CountTable::apply(const NetworkSpec& spec) const {
    NetworkSpec out = spec;
    for (auto& cpt : out.cpts)
        for (std::size_t r = 0; r < cpt.rows.size(); ++r) cpt.rows[r] = cpt_row(cpt.variable, r);
    return out;
}

CountTable update_parameters(const Network& net, CountTable counts, const CompletedCase& cc) {
    // Resolve the whole case first so a bad slice leaves the counts untouched.
    std::vector<std::vector<std::ptrdiff_t>> values(cc.size(),
                                                    std::vector<std::ptrdiff_t>(net.spec().variables.size(), -1));
    for (std::size_t t = 0; t < cc.size(); ++t) {
        for (const auto& [name, value] : cc[t]) {
            auto var = net.variable_index(name);
            if (!var) throw Error(ErrorCode::case_error, "slice " + std::to_string(t) + ": unknown variable '" + name + "'", name);
            auto val = net.value_index(*var, value);
            if (!val)
                throw Error(ErrorCode::case_error,
                            "slice " + std::to_string(t) + ": value '" + value + "' outside the domain of '" + name + "'",
                            name);
            values[t][*var] = static_cast<std::ptrdiff_t>(*val);
        }
        for (auto h : net.hidden())
            if (values[t][h] < 0)
                throw Error(ErrorCode::case_error,
                            "slice " + std::to_string(t) + ": hidden variable '" + net.variable(h).name + "' unassigned",
                            net.variable(h).name);
    }

    for (std::size_t t = 1; t < cc.size(); ++t) {
        for (const auto& cpt : net.spec().cpts) {
            const auto var = *net.variable_index(cpt.variable);
            if (values[t][var] < 0) continue;  // unobserved this slice
            std::size_t row = 0;
            for (const auto& p : cpt.parents) {
                const auto pv = *net.variable_index(p.name);
                row = row * net.variable(pv).domain.size() + static_cast<std::size_t>(values[t - p.lag][pv]);
            }
            counts.counts_.at(cpt.variable).at(row).at(static_cast<std::size_t>(values[t][var])) += 1.0;
        }
    }
    return counts;
}

}  // namespace eis::dbn
