#include <doctest.h>

#include <numeric>

#include "eis/dbn/inference.hpp"
#include "eis/dbn/io.hpp"
#include "eis/dbn/learning.hpp"
#include "eis/error.hpp"
#include "fixtures.hpp"
#include "generators.hpp"
#include "hygiene.hpp"
#include "oracles.hpp"

using namespace eis;
using namespace eis::dbn;

namespace {

Variable hidden(std::string name, std::size_t k, Dynamics d = Dynamics::temporal) {
    Variable v{std::move(name), {}, VarKind::hidden, d};
    for (std::size_t i = 0; i < k; ++i) v.domain.push_back(v.name + std::to_string(i));
    return v;
}

Variable observed(std::string name, std::size_t k) {
    Variable v{std::move(name), {}, VarKind::observed, Dynamics::temporal};
    for (std::size_t i = 0; i < k; ++i) v.domain.push_back(v.name + std::to_string(i));
    return v;
}

// a, b binary temporal hidden (b depends on a in-slice), o ternary observed.
NetworkSpec two_binary_one_ternary() {
    NetworkSpec s;
    s.variables = {hidden("a", 2), hidden("b", 2), observed("o", 3)};
    s.intra_edges = {{"a", "b"}, {"a", "o"}, {"b", "o"}};
    s.inter_edges = {{"a", "a"}, {"b", "b"}};
    s.priors = {{"a", {0.3, 0.7}}, {"b", {0.6, 0.4}}};
    s.cpts = {
        {"a", {{"a", 1}}, {{0.9, 0.1}, {0.2, 0.8}}},
        {"b", {{"a", 0}, {"b", 1}}, {{0.7, 0.3}, {0.4, 0.6}, {0.25, 0.75}, {0.1, 0.9}}},
        {"o", {{"a", 0}, {"b", 0}}, {{0.6, 0.3, 0.1}, {0.2, 0.5, 0.3}, {0.1, 0.1, 0.8}, {0.3, 0.3, 0.4}}},
    };
    return s;
}

bool has_violation(const NetworkSpec& s, const std::string& kind) {
    for (const auto& v : validate_network(s))
        if (v.kind == kind) return true;
    return false;
}

void check_matches_enumeration(const Network& net, const std::vector<Evidence>& evidence, double tol) {
    auto belief = init_belief(net);
    CHECK_DISTRIBUTION(belief.joint);
    for (const auto& e : evidence) {
        belief = filter_step(net, belief, e).belief;
        CHECK_DISTRIBUTION(belief.joint);
    }
    auto exact = enumerate_joint(net, evidence);
    if (exact.degenerate) return;
    CHECK_DISTRIBUTION(exact.joint);
    CHECK(testing::max_abs_diff(belief.joint, exact.joint) <= tol);
    for (const auto& name : {"a", "b"})
        if (net.variable_index(name)) CHECK(testing::max_abs_diff(query_posterior(net, belief, name),
                                                                  query_posterior(net, {0, exact.joint}, name)) <= tol);
}

}  // namespace

TEST_CASE("validate_network") {
    CHECK(validate_network(two_binary_one_ternary()).empty());
    CHECK(validate_network(testing::eis_network()->spec()).empty());

    auto s = two_binary_one_ternary();
    s.intra_edges.push_back({"b", "a"});
    s.cpts[0].parents.push_back({"b", 0});
    s.cpts[0].rows = {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}};
    CHECK(has_violation(s, "cycle"));

    s = two_binary_one_ternary();
    s.cpts[2].rows[1] = {0.2, 0.4, 0.3};
    auto violations = validate_network(s);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].kind == "unnormalized row");
    CHECK(violations[0].subject == "o[1]");

    s = two_binary_one_ternary();
    s.cpts[2].rows[0] = {1.2, -0.2, 0.0};
    CHECK(has_violation(s, "negative entry"));

    s = two_binary_one_ternary();
    s.cpts[1].parents[0].name = "zz";
    CHECK(has_violation(s, "unknown parent"));

    s = two_binary_one_ternary();
    s.variables[0].domain.clear();
    CHECK(has_violation(s, "empty domain"));

    s = two_binary_one_ternary();
    s.priors.erase("b");
    CHECK(has_violation(s, "missing prior"));

    s = two_binary_one_ternary();
    s.cpts.pop_back();
    CHECK(has_violation(s, "missing cpt"));

    s = two_binary_one_ternary();
    s.cpts[1].rows.pop_back();
    CHECK(has_violation(s, "row count"));

    try {
        Network bad(s);
        FAIL("expected InvalidSpec");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_spec);
    }
}

TEST_CASE("network JSON round trip") {
    auto s = two_binary_one_ternary();
    CHECK(network_from_json(to_json(s)) == s);
    const auto& eis_spec = testing::eis_network()->spec();
    CHECK(network_from_json(to_json(eis_spec)) == eis_spec);
}

TEST_CASE("init_belief") {
    auto s = two_binary_one_ternary();
    s.priors = {{"a", {0.5, 0.5}}, {"b", {0.5, 0.5}}};
    auto uniform = init_belief(Network(s));
    CHECK(uniform.joint == std::vector<double>(4, 0.25));

    s.priors = {{"a", {0.0, 1.0}}, {"b", {0.5, 0.5}}};
    Network point(s);
    auto pm = init_belief(point);
    CHECK_DISTRIBUTION(pm.joint);
    for (std::size_t st = 0; st < pm.joint.size(); ++st)
        if (point.hidden_value(st, 0) == 0) CHECK(pm.joint[st] == 0.0);

    // Mixed priors: outer product computed directly.
    s = two_binary_one_ternary();
    Network net(s);
    auto b = init_belief(net);
    const std::vector<double> outer = {0.3 * 0.6, 0.3 * 0.4, 0.7 * 0.6, 0.7 * 0.4};
    CHECK(testing::max_abs_diff(b.joint, outer) <= 1e-15);
    CHECK(testing::max_abs_diff(enumerate_joint(net, {}).joint, outer) <= 1e-15);
    CHECK(testing::max_abs_diff(testing::forward_oracle(s, {}).joint, outer) <= 1e-15);
}

TEST_CASE("filter_step with an uninformative observation returns the prediction") {
    auto s = two_binary_one_ternary();
    for (auto& row : s.cpts[2].rows) row = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    Network net(s);
    auto b0 = init_belief(net);
    auto predicted = reference::predict(net, b0.joint);
    auto step = filter_step(net, b0, {{"o", "o1"}});
    CHECK_FALSE(step.evidence_ignored);
    CHECK_DISTRIBUTION(step.belief.joint);
    CHECK(testing::max_abs_diff(step.belief.joint, predicted) <= 1e-12);
    CHECK(step.belief.slice == 1);
}

TEST_CASE("deterministic transition and observation give a point mass") {
    NetworkSpec s;
    s.variables = {hidden("h", 3), observed("o", 3)};
    s.intra_edges = {{"h", "o"}};
    s.inter_edges = {{"h", "h"}};
    s.priors = {{"h", {1.0 / 3, 1.0 / 3, 1.0 / 3}}};
    // h cycles 0 -> 1 -> 2 -> 0 and o copies h.
    s.cpts = {{"h", {{"h", 1}}, {{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}}, {"o", {{"h", 0}}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}};
    Network net(s);
    auto b = filter_step(net, init_belief(net), {{"o", "o2"}}).belief;
    CHECK(b.joint == std::vector<double>{0, 0, 1});
    b = filter_step(net, b, {{"o", "o0"}}).belief;
    CHECK(b.joint == std::vector<double>{1, 0, 0});
    // Contradicting a point mass: evidence ignored, prediction kept.
    auto step = filter_step(net, b, {{"o", "o0"}});
    CHECK(step.evidence_ignored);
    CHECK(step.belief.joint == std::vector<double>{0, 1, 0});
}

TEST_CASE("two binary hiddens and a ternary observation over three slices match enumeration") {
    Network net(two_binary_one_ternary());
    const std::vector<Evidence> evidence = {{{"o", "o2"}}, {{"o", "o0"}}, {{"o", "o1"}}};
    check_matches_enumeration(net, evidence, 1e-9);
    auto oracle = testing::forward_oracle(net.spec(), evidence);
    auto belief = init_belief(net);
    for (const auto& e : evidence) belief = filter_step(net, belief, e).belief;
    CHECK(testing::max_abs_diff(belief.joint, oracle.joint) <= 1e-12);
}

TEST_CASE("static hidden variables are carried over") {
    NetworkSpec s;
    s.variables = {hidden("s", 2, Dynamics::static_), hidden("t", 2), observed("o", 2)};
    s.intra_edges = {{"s", "t"}, {"t", "o"}};
    s.inter_edges = {{"t", "t"}};
    s.priors = {{"s", {0.2, 0.8}}, {"t", {0.5, 0.5}}};
    s.cpts = {{"t", {{"t", 1}, {"s", 0}}, {{0.9, 0.1}, {0.5, 0.5}, {0.3, 0.7}, {0.6, 0.4}}},
              {"o", {{"t", 0}}, {{0.8, 0.2}, {0.1, 0.9}}}};
    Network net(s);
    auto b = init_belief(net);
    for (int i = 0; i < 5; ++i) {
        b = filter_step(net, b, {}).belief;
        CHECK_DISTRIBUTION(b.joint);
        auto m = query_posterior(net, b, "s");
        CHECK(m[0] == doctest::Approx(0.2).epsilon(1e-14));
    }
    check_matches_enumeration(net, {{{"o", "o1"}}, {{"o", "o0"}}, {{"s", "s0"}}}, 1e-9);
}

TEST_CASE("evidence errors") {
    Network net(two_binary_one_ternary());
    auto b = init_belief(net);
    CHECK_THROWS_AS(filter_step(net, b, {{"o", "nope"}}), Error);
    CHECK_THROWS_AS(filter_step(net, b, {{"zz", "o0"}}), Error);
    try {
        filter_step(net, b, {{"o", "nope"}});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::evidence_error);
    }
}

TEST_CASE("query_posterior") {
    Network net(two_binary_one_ternary());
    CHECK(query_posterior(net, {0, std::vector<double>(4, 0.25)}, "a") == std::vector<double>{0.5, 0.5});
    CHECK(query_posterior(net, {0, {0, 0, 1, 0}}, "a") == std::vector<double>{0, 1});
    CHECK(query_posterior(net, {0, {0, 0, 1, 0}}, "b") == std::vector<double>{1, 0});
    try {
        query_posterior(net, init_belief(net), "o");
        FAIL("expected QueryError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::query_error);
    }
    CHECK_THROWS_AS(query_posterior(net, init_belief(net), "nope"), Error);

    testing::Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        auto spec = testing::random_network(rng);
        Network n(spec);
        BeliefState b{0, testing::random_distribution(rng, n.joint_size())};
        for (auto h : n.hidden()) {
            const auto& name = n.variable(h).name;
            auto m = query_posterior(n, b, name);
            CHECK_DISTRIBUTION(m);
            CHECK(testing::max_abs_diff(m, testing::oracle_marginal(spec, b.joint, name)) <= 1e-12);
        }
    }
}

TEST_CASE("parallel, serial and reference filter steps agree") {
    testing::Rng rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        auto spec = testing::random_network(rng, {.zero_rate = trial % 2 ? 0.2 : 0.0});
        Network net(spec);
        auto bp = init_belief(net), bs = bp, br = bp;
        for (const auto& e : testing::random_evidence(rng, spec, 4)) {
            auto p = filter_step(net, bp, e, Exec::parallel);
            auto s = filter_step(net, bs, e, Exec::serial);
            auto r = reference::filter_step(net, br, e);
            CHECK(p.belief == s.belief);
            CHECK(p.evidence_ignored == r.evidence_ignored);
            CHECK(testing::max_abs_diff(p.belief.joint, r.belief.joint) <= 1e-12);
            CHECK_DISTRIBUTION(p.belief.joint);
            CHECK_DISTRIBUTION(r.belief.joint);
            bp = p.belief;
            bs = s.belief;
            br = r.belief;
        }
    }
}

TEST_CASE("enumerate_joint") {
    Network net(two_binary_one_ternary());
    CHECK(enumerate_joint(net, {}).joint == init_belief(net).joint);
    CHECK(trajectory_count(net, 3) == 256);
    CHECK(enumerate_joint(net, std::vector<Evidence>(3)).trajectories == 256);

    NetworkSpec s;
    s.variables = {hidden("h", 2), observed("o", 2)};
    s.intra_edges = {{"h", "o"}};
    s.priors = {{"h", {0.5, 0.5}}};
    s.cpts = {{"h", {}, {{0.5, 0.5}}}, {"o", {{"h", 0}}, {{1, 0}, {1, 0}}}};
    Network zero(s);
    auto r = enumerate_joint(zero, std::vector<Evidence>{{{"o", "o1"}}});
    CHECK(r.degenerate);
    CHECK(r.joint.empty());

    auto big = testing::eis_network();
    try {
        enumerate_joint(*big, std::vector<Evidence>(6));
        FAIL("expected SpaceTooLarge");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::space_too_large);
    }
}

TEST_CASE("random specs agree with enumeration") {
    testing::Rng rng(314);
    int done = 0;
    while (done < 60) {
        auto spec = testing::random_network(rng);
        Network net(spec);
        const auto slices = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
        if (trajectory_count(net, slices) > kMaxTrajectories) continue;
        auto evidence = testing::random_evidence(rng, spec, slices);
        auto belief = init_belief(net);
        for (const auto& e : evidence) belief = filter_step(net, belief, e).belief;
        auto exact = enumerate_joint(net, evidence);
        if (!exact.degenerate) CHECK(testing::max_abs_diff(belief.joint, exact.joint) <= 1e-9);
        ++done;
    }
}

TEST_CASE("Dirichlet examples") {
    NetworkSpec s;
    s.variables = {hidden("h", 1), observed("x", 2)};
    s.variables[1].domain = {"A", "B"};
    s.intra_edges = {{"h", "x"}};
    s.inter_edges = {{"h", "h"}};
    s.priors = {{"h", {1.0}}};
    s.cpts = {{"h", {{"h", 1}}, {{1.0}}}, {"x", {{"h", 0}}, {{0.5, 0.5}}}};
    Network net(s);
    auto prior = CountTable::uniform(net, 1.0);

    CHECK(update_parameters(net, prior, {}) == prior);
    CHECK(update_parameters(net, prior, {{{"h", "h0"}}}) == prior);

    CompletedCase c = {{{"h", "h0"}}};
    for (auto v : {"A", "A", "B", "A"}) c.push_back({{"h", "h0"}, {"x", v}});
    auto row = update_parameters(net, prior, c).cpt_row("x", 0);
    CHECK(row[0] == 4.0 / 6);
    CHECK(row[1] == 2.0 / 6);

    for (int n : {0, 1, 5, 17}) {
        CompletedCase cn = {{{"h", "h0"}}};
        for (int i = 0; i < n; ++i) cn.push_back({{"h", "h0"}, {"x", "A"}});
        auto r = update_parameters(net, prior, cn).cpt_row("x", 0);
        CHECK(r[0] == static_cast<double>(n + 1) / (n + 2));
        CHECK(r[1] == 1.0 / (n + 2));
        CHECK_DISTRIBUTION(r);
    }

    try {
        update_parameters(net, prior, {{{"h", "h0"}}, {{"h", "h0"}, {"x", "C"}}});
        FAIL("expected CaseError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::case_error);
    }
    CHECK_THROWS_AS(update_parameters(net, prior, {{{"h", "h0"}}, {{"x", "A"}}}), Error);
}

TEST_CASE("CountTable construction and application") {
    Network net(two_binary_one_ternary());
    auto from = CountTable::from_cpts(net, 10.0);
    CHECK(from.row("o", 0) == std::vector<double>{6.0, 3.0, 1.0});
    auto applied = Network(from.apply(net.spec()));
    CHECK(validate_network(applied.spec()).empty());
    CHECK(testing::max_abs_diff(applied.spec().find_cpt("o")->rows[0], {0.6, 0.3, 0.1}) <= 1e-15);
    CHECK(counts_from_json(net, to_json(from)) == from);
    CHECK_THROWS_AS(CountTable::uniform(net, 0.0), Error);
    auto bad = from.counts();
    bad["o"][0][0] = 0.0;
    CHECK_THROWS_AS(CountTable::from_counts(net, bad), Error);
}

TEST_CASE("update_parameters matches the closed form and commutes") {
    testing::Rng rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        auto spec = testing::random_network(rng);
        Network net(spec);
        std::map<std::string, std::vector<std::vector<double>>> prior;
        const auto shape = CountTable::uniform(net);
        for (const auto& [var, rows] : shape.counts())
            for (const auto& r : rows) {
                auto& out = prior[var].emplace_back();
                for (std::size_t i = 0; i < r.size(); ++i) out.push_back(std::uniform_int_distribution<int>(1, 5)(rng));
            }
        auto table = CountTable::from_counts(net, prior);
        auto c1 = testing::random_case(rng, spec, 4);
        auto c2 = testing::random_case(rng, spec, 3);
        auto ab = update_parameters(net, update_parameters(net, table, c1), c2);
        auto ba = update_parameters(net, update_parameters(net, table, c2), c1);
        CHECK(ab == ba);
        const std::vector<CompletedCase> cases = {c1, c2};
        auto expected = testing::dirichlet_posterior_mean(spec, prior, cases);
        for (const auto& [var, rows] : expected)
            for (std::size_t r = 0; r < rows.size(); ++r) {
                auto got = ab.cpt_row(var, r);
                CHECK(testing::max_abs_diff(got, rows[r]) <= 1e-12);
                CHECK_DISTRIBUTION(got);
            }
    }
}

TEST_CASE("forget makes one marginal uniform and keeps the rest") {
    testing::Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        Network net(testing::random_network(rng));
        BeliefState b{3, testing::random_distribution(rng, net.joint_size(), 0.3)};
        const auto target = net.variable(net.hidden()[0]).name;
        auto f = forget(net, b, target);
        CHECK(f.slice == 3);
        CHECK_DISTRIBUTION(f.joint);
        auto m = query_posterior(net, f, target);
        for (double x : m) CHECK(x == doctest::Approx(1.0 / m.size()).epsilon(1e-14));
        for (std::size_t k = 1; k < net.hidden().size(); ++k) {
            const auto& name = net.variable(net.hidden()[k]).name;
            CHECK(testing::max_abs_diff(query_posterior(net, f, name), query_posterior(net, b, name)) <= 1e-14);
        }
    }
}
