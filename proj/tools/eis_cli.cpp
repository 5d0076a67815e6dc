#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "eis/corpus/io.hpp"
#include "eis/dbn/io.hpp"
#include "eis/dbn/learning.hpp"
#include "eis/error.hpp"
#include "eis/service/engine.hpp"
#include "eis/service/http.hpp"

namespace {

using namespace eis;

void add_overrides(CLI::App* cmd, service::Overrides& o) {
    cmd->add_option("--lambda", o.lambda, "Weight of the DBN posterior in objective fusion")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--alpha", o.alpha, "Weight of content match in the score")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--theta", o.theta, "Minimum score kept in R")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--top-k", o.top_k, "Maximum size of R")->check(CLI::PositiveNumber);
    cmd->add_option("--tau", o.tau, "Activation threshold for adaptation")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--reference-year", o.reference_year, "Fixed reference year for horizons");
}

std::string config_path(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("EIS_CONFIG"); env && *env) return env;
    throw Error(ErrorCode::config_error, "no configuration: pass --config or set EIS_CONFIG", "config");
}

int cmd_ingest(const std::string& path) {
    std::size_t warnings = 0;
    auto docs = corpus::read_corpus_file(path, [&](const std::string& w) {
        ++warnings;
        std::cerr << "warning: " << w << "\n";
    });
    auto index = corpus::ingest_corpus(docs);
    nlohmann::json links = nlohmann::json::object();
    for (auto t : corpus::kLinkTypes) {
        std::size_t n = 0;
        for (corpus::DocOrdinal o = 0; o < index.size(); ++o)
            for (const auto& l : index.links(o)) n += l.type == t;
        links[std::string(corpus::to_string(t))] = n / 2;
    }
    nlohmann::json out = {{"documents", index.size()},
                          {"terms", index.term_postings().size()},
                          {"links", links},
                          {"warnings", warnings}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_validate(const std::string& path) {
    auto spec = dbn::read_network_file(path);
    auto violations = dbn::validate_network(spec);
    for (const auto& v : violations) std::cout << v.kind << "\t" << v.subject << "\t" << v.message << "\n";
    if (violations.empty()) {
        std::cout << "ok: " << spec.variables.size() << " variables, " << spec.cpts.size() << " cpts\n";
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive information-seeking engine"};
    app.require_subcommand(1);

    std::string config_flag;
    service::Overrides overrides;

    std::string ingest_path;
    auto* ingest = app.add_subcommand("ingest", "Validate and index a JSONL corpus");
    ingest->add_option("corpus", ingest_path, "Corpus file (JSON Lines)")->required();

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    std::string host;
    int port = -1;
    serve->add_option("--config", config_flag, "Service configuration (default: $EIS_CONFIG)");
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
    add_overrides(serve, overrides);

    auto* rep = app.add_subcommand("replay", "Replay an activity log and print per-step reports");
    std::string log_path, corpus_path, out_path, counts_out;
    double prior_strength = 10.0;
    rep->add_option("log", log_path, "Activity log (JSON Lines)")->required();
    rep->add_option("--corpus", corpus_path, "Corpus file")->required();
    rep->add_option("--config", config_flag, "Service configuration (default: $EIS_CONFIG)");
    rep->add_option("--out", out_path, "Write the report here instead of stdout");
    rep->add_option("--counts-out", counts_out, "Write CPT counts updated with the replayed case");
    rep->add_option("--prior-strength", prior_strength, "Equivalent sample size of the prior counts")
        ->check(CLI::PositiveNumber);
    add_overrides(rep, overrides);

    auto* query = app.add_subcommand("query", "Run a query in a persisted session");
    std::string query_text, session_id;
    query->add_option("query", query_text, "Boolean query")->required();
    query->add_option("--session", session_id, "Session id")->required();
    query->add_option("--config", config_flag, "Service configuration (default: $EIS_CONFIG)");
    add_overrides(query, overrides);

    auto* validate = app.add_subcommand("validate-network", "Check a DBN specification");
    std::string spec_path;
    validate->add_option("spec", spec_path, "Network specification (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*ingest) return cmd_ingest(ingest_path);
        if (*validate) return cmd_validate(spec_path);

        auto config = service::load_service_config(config_path(config_flag));
        if (*serve) {
            if (!host.empty()) config.host = host;
            if (port >= 0) config.port = port;
            auto engine = service::Engine::load(config, overrides);
            service::HttpService http(*engine);
            std::cerr << "listening on " << config.host << ":" << config.port << "\n";
            http.listen(config.host, config.port);
            return 0;
        }
        if (*rep) {
            config.corpus_path = corpus_path;
            config.data_dir.clear();
            auto engine = service::Engine::load(config, overrides);
            std::ifstream in(log_path);
            if (!in) throw Error(ErrorCode::io_error, "cannot open log '" + log_path + "'", "log");
            auto result = service::replay(*engine->corpus(), engine->model(), engine->config(), in);
            std::ofstream file;
            if (!out_path.empty()) {
                file.open(out_path);
                if (!file) throw Error(ErrorCode::io_error, "cannot write '" + out_path + "'", "out");
            }
            std::ostream& out = out_path.empty() ? std::cout : file;
            for (const auto& r : result.reports) out << r.dump() << "\n";
            if (!counts_out.empty()) {
                const auto& net = *engine->model().network;
                auto counts = dbn::CountTable::from_cpts(net, prior_strength);
                counts = dbn::update_parameters(net, std::move(counts),
                                                user::completed_case(engine->model(), result.final_state));
                std::ofstream c(counts_out);
                c << dbn::to_json(counts).dump(2) << "\n";
                if (!c) throw Error(ErrorCode::io_error, "cannot write '" + counts_out + "'", "counts-out");
            }
            return 0;
        }
        if (*query) {
            auto engine = service::Engine::load(config, overrides);
            std::cout << adapt::to_json(engine->query(session_id, query_text)).dump(2) << "\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
