#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "eis/dbn/network.hpp"

namespace eis::dbn {

/// Dirichlet pseudo-counts for every CPT row of a network (temporal hidden
/// and observed variables). All counts stay strictly positive.
class CountTable {
public:
    CountTable() = default;

    // Every count set to `alpha` (> 0).
    static CountTable uniform(const Network& net, double alpha = 1.0);

    // Counts = equivalent_sample_size * CPT entry, floored at `min_count`.
    static CountTable from_cpts(const Network& net, double equivalent_sample_size, double min_count = 1e-3);

    // Explicit counts; throws Error(case_error) on a shape mismatch or a
    // non-positive count.
    static CountTable from_counts(const Network& net, std::map<std::string, std::vector<std::vector<double>>> counts);

    const std::map<std::string, std::vector<std::vector<double>>>& counts() const noexcept { return counts_; }
    const std::vector<double>& row(std::string_view variable, std::size_t row) const;

    // Posterior-mean CPT row: counts divided by their sum.
    std::vector<double> cpt_row(std::string_view variable, std::size_t row) const;

    // `spec` with every CPT replaced by the posterior-mean rows.
    NetworkSpec apply(const NetworkSpec& spec) const;

    bool operator==(const CountTable&) const = default;

private:
    friend CountTable update_parameters(const Network&, CountTable, const std::vector<Evidence>&);

    std::map<std::string, std::vector<std::vector<double>>> counts_;
};

/// A completed case: a full variable -> value assignment per slice, slice 0
/// first. Slice 0 only supplies the lag-1 parents of slice 1.
using CompletedCase = std::vector<Evidence>;

/// Adds one count per (variable, parent row) realised in slices 1..T. Every
/// hidden variable must be assigned in every slice; observed variables may
/// be absent (that slice contributes nothing for them). Throws
/// Error(case_error) for missing hidden values or out-of-domain values.
CountTable update_parameters(const Network& net, CountTable counts, const CompletedCase& completed_case);

}  // namespace eis::dbn
