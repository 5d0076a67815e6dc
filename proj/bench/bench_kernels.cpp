// Serial vs OpenMP for each parallel kernel, next to its reference.
#include <benchmark/benchmark.h>

#include "eis/adapt/adaptation.hpp"
#include "eis/dbn/inference.hpp"
#include "generators.hpp"

using namespace eis;

namespace {

// Random network whose joint has at least `min_joint` states.
dbn::Network network_with_joint(std::size_t min_joint) {
    testing::Rng rng(1);
    testing::NetworkShape shape{6, 4, 2, 0.0};
    for (;;) {
        dbn::Network net(testing::random_network(rng, shape));
        if (net.joint_size() >= min_joint) return net;
    }
}

void filter(benchmark::State& state, int mode) {
    auto net = network_with_joint(static_cast<std::size_t>(state.range(0)));
    testing::Rng rng(2);
    auto evidence = testing::random_evidence(rng, net.spec(), 1, 0.0).front();
    auto belief = dbn::init_belief(net);
    for (auto _ : state) {
        auto r = mode == 2   ? dbn::reference::filter_step(net, belief, evidence)
                 : mode == 1 ? dbn::filter_step(net, belief, evidence, Exec::parallel)
                             : dbn::filter_step(net, belief, evidence, Exec::serial);
        benchmark::DoNotOptimize(r.belief.joint.data());
    }
    state.counters["joint"] = static_cast<double>(net.joint_size());
}

void BM_filter_serial(benchmark::State& s) { filter(s, 0); }
void BM_filter_parallel(benchmark::State& s) { filter(s, 1); }
void BM_filter_reference(benchmark::State& s) { filter(s, 2); }
BENCHMARK(BM_filter_serial)->Arg(64)->Arg(512)->Arg(2048);
BENCHMARK(BM_filter_parallel)->Arg(64)->Arg(512)->Arg(2048);
BENCHMARK(BM_filter_reference)->Arg(64)->Arg(512)->Arg(2048);

void links(benchmark::State& state, int mode) {
    testing::Rng rng(3);
    auto docs = testing::random_corpus(rng, static_cast<std::size_t>(state.range(0)));
    std::sort(docs.begin(), docs.end(), [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
    for (auto _ : state) {
        if (mode == 2) {
            auto l = corpus::reference::build_links_pairwise(docs);
            benchmark::DoNotOptimize(l.data());
        } else {
            auto index = corpus::ingest_corpus(docs, mode ? Exec::parallel : Exec::serial);
            benchmark::DoNotOptimize(index.size());
        }
    }
}

void BM_ingest_serial(benchmark::State& s) { links(s, 0); }
void BM_ingest_parallel(benchmark::State& s) { links(s, 1); }
void BM_links_pairwise(benchmark::State& s) { links(s, 2); }
BENCHMARK(BM_ingest_serial)->Arg(500)->Arg(2000);
BENCHMARK(BM_ingest_parallel)->Arg(500)->Arg(2000);
BENCHMARK(BM_links_pairwise)->Arg(500)->Arg(2000);

void rank(benchmark::State& state, Exec exec) {
    testing::Rng rng(4);
    auto index = corpus::ingest_corpus(testing::random_corpus(rng, static_cast<std::size_t>(state.range(0))));
    corpus::OrdinalSet all(index.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<corpus::DocOrdinal>(i);
    const std::vector<std::string> terms = {"user", "model", "bayesian", "retrieval"};
    const std::vector<corpus::BooleanQuery> conjuncts = {
        corpus::BooleanQuery::attr_eq("venue_type", "journal"),
        corpus::BooleanQuery::attr_cmp("year", corpus::CmpOp::ge, 2003)};
    for (auto _ : state) {
        auto r = adapt::rank_candidates(index, all, terms, conjuncts, {}, 50, exec);
        benchmark::DoNotOptimize(r.data());
    }
}

void BM_rank_serial(benchmark::State& s) { rank(s, Exec::serial); }
void BM_rank_parallel(benchmark::State& s) { rank(s, Exec::parallel); }
BENCHMARK(BM_rank_serial)->Arg(2000)->Arg(20000);
BENCHMARK(BM_rank_parallel)->Arg(2000)->Arg(20000);

}  // namespace

BENCHMARK_MAIN();
