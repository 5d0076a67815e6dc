#include "eis/dbn/inference.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include "eis/error.hpp"

namespace eis::dbn {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> normalized(std::vector<double> p) {
    double sum = 0.0;
    for (double x : p) sum += x;
    for (double& x : p) x /= sum;
    return p;
}

// exp(log_p - logsumexp(log_p)), then one more division by the linear sum so
// the output sums to one at double precision.
std::vector<double> from_log(const std::vector<double>& log_p, double lse) {
    std::vector<double> p(log_p.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = log_p[i] == kNegInf ? 0.0 : std::exp(log_p[i] - lse);
    return normalized(std::move(p));
}

double log_sum_exp(const std::vector<double>& v) {
    double m = kNegInf;
    for (double x : v) m = std::max(m, x);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : v)
        if (x != kNegInf) s += std::exp(x - m);
    return m + std::log(s);
}

struct StaticMask {
    std::vector<std::size_t> positions;

    bool same(const Network& net, std::size_t a, std::size_t b) const {
        for (auto k : positions)
            if (net.hidden_value(a, k) != net.hidden_value(b, k)) return false;
        return true;
    }
};

StaticMask static_mask(const Network& net) {
    StaticMask m;
    for (std::size_t k = 0; k < net.hidden().size(); ++k)
        if (net.variable(net.hidden()[k]).dynamics == Dynamics::static_) m.positions.push_back(k);
    return m;
}

}  // namespace

bool is_distribution(std::span<const double> p, double tolerance) {
    double sum = 0.0;
    for (double x : p) {
        if (!(x >= 0.0)) return false;
        sum += x;
    }
    return std::abs(sum - 1.0) <= tolerance;
}

BeliefState init_belief(const Network& net) {
    BeliefState b;
    b.joint.assign(net.joint_size(), 1.0);
    for (std::size_t k = 0; k < net.hidden().size(); ++k) {
        const auto& prior = net.spec().priors.at(net.variable(net.hidden()[k]).name);
        for (std::size_t s = 0; s < b.joint.size(); ++s) b.joint[s] *= prior[net.hidden_value(s, k)];
    }
    b.joint = normalized(std::move(b.joint));
    return b;
}

StepResult filter_step(const Network& net, const BeliefState& belief, const Evidence& evidence, Exec exec) {
    const auto resolved = net.resolve(evidence);
    const auto n = net.joint_size();
    if (belief.joint.size() != n)
        throw Error(ErrorCode::evidence_error, "belief does not match the network's joint size");

    std::vector<double> log_old(n);
    for (std::size_t s = 0; s < n; ++s) log_old[s] = belief.joint[s] > 0.0 ? std::log(belief.joint[s]) : kNegInf;

    std::vector<std::pair<const Network::CompiledCpt*, std::size_t>> transitions;  // (cpt, child pos)
    for (std::size_t k = 0; k < net.hidden().size(); ++k)
        if (const auto* c = net.cpt(net.hidden()[k])) transitions.emplace_back(c, k);
    const auto statics = static_mask(net);

    // Split evidence into observation likelihoods and hidden clamps.
    std::vector<std::pair<const Network::CompiledCpt*, std::size_t>> observations;
    std::vector<std::pair<std::size_t, std::size_t>> clamps;  // (hidden pos, value)
    for (const auto& [var, val] : resolved) {
        if (auto hp = net.hidden_position(var))
            clamps.emplace_back(*hp, val);
        else
            observations.emplace_back(net.cpt(var), val);
    }

    std::vector<double> log_pred(n, kNegInf);
    std::vector<double> log_post(n, kNegInf);
    const bool parallel = exec == Exec::parallel;

    // Predict + condition. Each target state is independent; the inner sum
    // is an online log-sum-exp over source states.
#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t ti = 0; ti < static_cast<std::int64_t>(n); ++ti) {
        const auto to = static_cast<std::size_t>(ti);
        double m = kNegInf;
        double acc = 0.0;
        for (std::size_t from = 0; from < n; ++from) {
            if (log_old[from] == kNegInf || !statics.same(net, from, to)) continue;
            double lt = log_old[from];
            for (const auto& [c, child] : transitions) {
                lt += c->log_rows[c->row_of(net, from, to)][net.hidden_value(to, child)];
                if (lt == kNegInf) break;
            }
            if (lt == kNegInf) continue;
            if (lt > m) {
                acc = acc * std::exp(m - lt) + 1.0;
                m = lt;
            } else {
                acc += std::exp(lt - m);
            }
        }
        log_pred[to] = m == kNegInf ? kNegInf : m + std::log(acc);

        double lp = log_pred[to];
        for (const auto& [hp, val] : clamps)
            if (net.hidden_value(to, hp) != val) lp = kNegInf;
        for (const auto& [c, val] : observations) {
            if (lp == kNegInf) break;
            lp += c->log_rows[c->row_of(net, to, to)][val];
        }
        log_post[to] = lp;
    }

    StepResult out;
    out.belief.slice = belief.slice + 1;
    const double lse = log_sum_exp(log_post);
    if (lse == kNegInf) {
        out.evidence_ignored = true;
        out.belief.joint = from_log(log_pred, log_sum_exp(log_pred));
    } else {
        out.belief.joint = from_log(log_post, lse);
    }
    return out;
}

std::vector<double> query_posterior(const Network& net, const BeliefState& belief, std::string_view variable) {
    auto var = net.variable_index(variable);
    if (!var) throw Error(ErrorCode::query_error, "unknown variable '" + std::string(variable) + "'", std::string(variable));
    auto hp = net.hidden_position(*var);
    if (!hp)
        throw Error(ErrorCode::query_error, "'" + std::string(variable) + "' is observed, not hidden",
                    std::string(variable));
    std::vector<double> m(net.radix(*hp), 0.0);
    for (std::size_t s = 0; s < belief.joint.size(); ++s) m[net.hidden_value(s, *hp)] += belief.joint[s];
    return normalized(std::move(m));
}

BeliefState forget(const Network& net, const BeliefState& belief, std::string_view variable) {
    const auto var = net.variable_index(variable);
    const auto pos = var ? net.hidden_position(*var) : std::nullopt;
    if (!pos) throw Error(ErrorCode::query_error, "'" + std::string(variable) + "' is not a hidden variable",
                          std::string(variable));
    const auto stride = net.stride(*pos), radix = net.radix(*pos);
    BeliefState out{belief.slice, std::vector<double>(belief.joint.size(), 0.0)};
    for (std::size_t s = 0; s < belief.joint.size(); ++s) {
        const auto base = s - net.hidden_value(s, *pos) * stride;
        out.joint[base] += belief.joint[s];
    }
    for (std::size_t s = 0; s < out.joint.size(); ++s) {
        if (net.hidden_value(s, *pos) != 0) continue;
        const double share = out.joint[s] / static_cast<double>(radix);
        for (std::size_t v = 0; v < radix; ++v) out.joint[s + v * stride] = share;
    }
    return out;
}

std::vector<std::vector<double>> hidden_marginals(const Network& net, const BeliefState& belief) {
    std::vector<std::vector<double>> out;
    for (auto var : net.hidden()) out.push_back(query_posterior(net, belief, net.variable(var).name));
    return out;
}

std::vector<std::size_t> marginal_argmax(const Network& net, const BeliefState& belief) {
    std::vector<std::size_t> out;
    for (const auto& m : hidden_marginals(net, belief)) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < m.size(); ++i)
            if (m[i] > m[best]) best = i;
        out.push_back(best);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reference route: linear space, CPT rows looked up through the declarative
// spec by name. Shared by reference::filter_step and enumerate_joint.

namespace {

struct RefModel {
    const Network& net;

    std::size_t value_of(std::string_view name, std::size_t state) const {
        return net.hidden_value(state, *net.hidden_position(*net.variable_index(name)));
    }

    double cpt_prob(const Cpt& cpt, std::size_t prev, std::size_t cur, std::size_t child_value) const {
        std::size_t row = 0;
        for (const auto& p : cpt.parents) {
            const auto& dom = net.spec().find(p.name)->domain;
            row = row * dom.size() + value_of(p.name, p.lag == 1 ? prev : cur);
        }
        return cpt.rows[row][child_value];
    }

    double transition(std::size_t prev, std::size_t cur) const {
        double t = 1.0;
        for (std::size_t k = 0; k < net.hidden().size(); ++k) {
            const auto& v = net.variable(net.hidden()[k]);
            if (v.dynamics == Dynamics::static_) {
                if (net.hidden_value(prev, k) != net.hidden_value(cur, k)) return 0.0;
            } else {
                t *= cpt_prob(*net.spec().find_cpt(v.name), prev, cur, net.hidden_value(cur, k));
            }
        }
        return t;
    }

    double likelihood(std::size_t state, const Evidence& e) const {
        double l = 1.0;
        for (const auto& [name, value] : e) {
            const auto var = *net.variable_index(name);
            const auto val = *net.value_index(var, value);
            if (net.hidden_position(var)) {
                if (value_of(name, state) != val) return 0.0;
            } else {
                l *= cpt_prob(*net.spec().find_cpt(name), state, state, val);
            }
        }
        return l;
    }

    double prior(std::size_t state) const {
        double p = 1.0;
        for (std::size_t k = 0; k < net.hidden().size(); ++k)
            p *= net.spec().priors.at(net.variable(net.hidden()[k]).name)[net.hidden_value(state, k)];
        return p;
    }
};

}  // namespace

namespace reference {

std::vector<double> predict(const Network& net, const std::vector<double>& joint) {
    const RefModel ref{net};
    std::vector<double> pred(joint.size(), 0.0);
    for (std::size_t from = 0; from < joint.size(); ++from) {
        if (joint[from] == 0.0) continue;
        for (std::size_t to = 0; to < joint.size(); ++to) pred[to] += joint[from] * ref.transition(from, to);
    }
    return normalized(std::move(pred));
}

StepResult filter_step(const Network& net, const BeliefState& belief, const Evidence& evidence) {
    net.resolve(evidence);  // validates
    const RefModel ref{net};
    StepResult out;
    out.belief.slice = belief.slice + 1;
    auto pred = predict(net, belief.joint);
    std::vector<double> post(pred.size());
    double total = 0.0;
    for (std::size_t s = 0; s < pred.size(); ++s) {
        post[s] = pred[s] * ref.likelihood(s, evidence);
        total += post[s];
    }
    if (total == 0.0) {
        out.evidence_ignored = true;
        out.belief.joint = std::move(pred);
    } else {
        out.belief.joint = normalized(std::move(post));
    }
    return out;
}

}  // namespace reference

std::size_t trajectory_count(const Network& net, std::size_t evidence_slices) {
    constexpr std::size_t cap = std::numeric_limits<std::size_t>::max() / 64;
    std::size_t count = 1;
    for (std::size_t k = 0; k < net.hidden().size(); ++k) {
        const bool is_static = net.variable(net.hidden()[k]).dynamics == Dynamics::static_;
        const std::size_t reps = is_static ? 1 : evidence_slices + 1;
        for (std::size_t r = 0; r < reps; ++r) {
            count *= net.radix(k);
            if (count > cap) return cap;
        }
    }
    return count;
}

EnumerationResult enumerate_joint(const Network& net, std::span<const Evidence> evidence) {
    for (const auto& e : evidence) net.resolve(e);
    const auto total_paths = trajectory_count(net, evidence.size());
    if (total_paths > kMaxTrajectories)
        throw Error(ErrorCode::space_too_large,
                    "enumeration needs " + std::to_string(total_paths) + " trajectories (limit " +
                        std::to_string(kMaxTrajectories) + ")");

    const RefModel ref{net};
    const auto statics = static_mask(net);
    const auto n = net.joint_size();
    const auto slices = evidence.size();
    EnumerationResult out;
    std::vector<double> final_weight(n, 0.0);

    // Depth-first over trajectories; `path[t]` is the joint state at slice t.
    std::vector<std::size_t> path(slices + 1);
    auto descend = [&](auto&& self, std::size_t t, double weight) -> void {
        if (t == slices) {
            final_weight[path[t]] += weight;
            ++out.trajectories;
            return;
        }
        for (std::size_t next = 0; next < n; ++next) {
            if (!statics.same(net, path[t], next)) continue;
            path[t + 1] = next;
            self(self, t + 1, weight * ref.transition(path[t], next) * ref.likelihood(next, evidence[t]));
        }
    };
    for (std::size_t h0 = 0; h0 < n; ++h0) {
        path[0] = h0;
        descend(descend, 0, ref.prior(h0));
    }

    double total = 0.0;
    for (double w : final_weight) total += w;
    if (!(total > 0.0)) {
        out.degenerate = true;
        return out;
    }
    for (double& w : final_weight) w /= total;
    out.joint = std::move(final_weight);
    return out;
}

}  // namespace eis::dbn
