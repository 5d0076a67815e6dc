#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "eis/dbn/network.hpp"
#include "eis/exec.hpp"

namespace eis::dbn {

/// Filtered distribution over the joint of the hidden variables at a slice.
struct BeliefState {
    std::size_t slice = 0;
    std::vector<double> joint;  // indexed by Network joint state

    bool operator==(const BeliefState&) const = default;
};

struct StepResult {
    BeliefState belief;
    // Set when the evidence had zero probability under the prediction; the
    // belief is then the unconditioned prediction.
    bool evidence_ignored = false;
};

// Slice-0 belief: product of the hidden-variable priors.
BeliefState init_belief(const Network& net);

/// One exact forward step: predict through the transition CPTs (static
/// variables carried over), condition on `evidence`, renormalise. Computed
/// in log space. Throws Error(evidence_error) for evidence outside the
/// network's domains.
StepResult filter_step(const Network& net, const BeliefState& belief, const Evidence& evidence,
                       Exec exec = Exec::parallel);

// Drops what the belief knows about one hidden variable: its marginal becomes
// uniform and the distribution of the others is unchanged. Used when a
// declared static characteristic is re-declared with a different value.
BeliefState forget(const Network& net, const BeliefState& belief, std::string_view variable);

// Marginal of one hidden variable. Throws Error(query_error) for unknown or
// observed variables.
std::vector<double> query_posterior(const Network& net, const BeliefState& belief,
                                    std::string_view variable);

// Marginals of every hidden variable, in Network::hidden() order.
std::vector<std::vector<double>> hidden_marginals(const Network& net, const BeliefState& belief);

// Most probable value index of each hidden variable under its marginal
// (lowest index on ties).
std::vector<std::size_t> marginal_argmax(const Network& net, const BeliefState& belief);

// True when entries are non-negative and sum to 1 within `tolerance`.
bool is_distribution(std::span<const double> p, double tolerance = kOutputTolerance);

namespace reference {

// Straightforward linear-space transition, one (from, to) pair at a time.
std::vector<double> predict(const Network& net, const std::vector<double>& joint);

// Serial linear-space filter step built on reference::predict.
StepResult filter_step(const Network& net, const BeliefState& belief, const Evidence& evidence);

}  // namespace reference

/// Exact posterior by summation over every hidden trajectory
/// h_0 .. h_T, with evidence[t-1] observed at slice t.
struct EnumerationResult {
    std::vector<double> joint;  // final-slice posterior; empty when degenerate
    bool degenerate = false;    // evidence has zero probability everywhere
    std::size_t trajectories = 0;
};

inline constexpr std::size_t kMaxTrajectories = 1'000'000;

// Number of hidden trajectories enumerate_joint would visit.
std::size_t trajectory_count(const Network& net, std::size_t evidence_slices);

// Throws Error(space_too_large) beyond kMaxTrajectories.
EnumerationResult enumerate_joint(const Network& net, std::span<const Evidence> evidence_sequence);

}  // namespace eis::dbn
