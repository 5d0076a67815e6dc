#include <doctest.h>
#include <httplib.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "eis/corpus/io.hpp"
#include "eis/error.hpp"
#include "eis/service/engine.hpp"
#include "eis/service/http.hpp"
#include "fixtures.hpp"
#include "hygiene.hpp"

using namespace eis;
using namespace eis::service;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "eis-test-XXXXXX").string();
        path = ::mkdtemp(tmpl.data());
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

// Service config in `dir` pointing at the shipped data files.
std::string write_config(const fs::path& dir, bool persist = true) {
    json j = {{"port", 0},
              {"corpus", testing::data_path("fixtures/scenario_corpus.jsonl")},
              {"network", testing::data_path("eis_network.json")},
              {"lexicon", testing::data_path("eis_lexicon.json")},
              {"adaptation", testing::data_path("eis_adaptation.json")}};
    if (persist) j["data_dir"] = "state";
    const auto path = (dir / "eis.json").string();
    std::ofstream(path) << j.dump(2);
    return path;
}

std::vector<LogRecord> scenario_log() {
    std::ifstream in(testing::data_path("fixtures/scenario_log.jsonl"));
    return read_log(in);
}

std::vector<std::string> replay_lines(const Engine& e, const std::vector<LogRecord>& log) {
    std::vector<std::string> out;
    for (const auto& r : replay(*e.corpus(), e.model(), e.config(), log).reports) out.push_back(r.dump());
    return out;
}

struct Running {
    HttpService http;
    int port;
    std::thread thread;
    explicit Running(Engine& e) : http(e), port(http.bind_any("127.0.0.1")), thread([this] { http.run(); }) {
        http.wait_until_ready();
    }
    ~Running() {
        http.stop();
        thread.join();
    }
};

struct CommandResult {
    int status;
    std::string output;
};

CommandResult run(const std::string& args) {
    const std::string cmd = std::string(EIS_CLI) + " " + args + " 2>&1";
    std::string out;
    FILE* p = ::popen(cmd.c_str(), "r");
    std::array<char, 4096> buf{};
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
    const int rc = ::pclose(p);
    return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, out};
}

}  // namespace

TEST_CASE("service config resolves paths against its directory") {
    TempDir tmp;
    auto c = load_service_config(write_config(tmp.path));
    CHECK(c.port == 0);
    CHECK(c.data_dir == (tmp.path / "state").lexically_normal().string());
    CHECK(c.corpus_path == testing::data_path("fixtures/scenario_corpus.jsonl"));

    auto shipped = load_service_config(testing::data_path("eis.json"));
    CHECK(fs::exists(shipped.corpus_path));
    CHECK(fs::exists(shipped.network_path));

    std::ofstream(tmp.path / "bad.json") << R"({"port": 1})";
    try {
        load_service_config((tmp.path / "bad.json").string());
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::config_error);
    }
    std::ofstream(tmp.path / "garbage.json") << "{";
    CHECK_THROWS_AS(load_service_config((tmp.path / "garbage.json").string()), Error);
    CHECK_THROWS_AS(load_service_config((tmp.path / "missing.json").string()), Error);
}

TEST_CASE("overrides replace adaptation parameters") {
    adapt::AdaptationConfig c;
    Overrides o;
    o.lambda = 0.9;
    o.top_k = 3;
    o.tau = 0.7;
    o.apply(c);
    CHECK(c.lambda == 0.9);
    CHECK(c.top_k == 3);
    CHECK(c.tau == 0.7);
    CHECK(c.alpha == 0.6);
}

TEST_CASE("replay") {
    TempDir tmp;
    auto engine = Engine::load(load_service_config(write_config(tmp.path, false)));

    std::istringstream empty("");
    auto r0 = replay(*engine->corpus(), engine->model(), engine->config(), empty);
    REQUIRE(r0.reports.size() == 1);
    CHECK(r0.reports[0]["type"] == "initial");

    const auto log = scenario_log();
    auto a = replay_lines(*engine, log);
    auto b = replay_lines(*engine, log);
    CHECK(a == b);
    CHECK(a.size() == log.size());  // initial + one per event

    auto result = replay(*engine->corpus(), engine->model(), engine->config(), log);
    const auto& st = result.final_state;
    CHECK_DISTRIBUTION(st.objective_posterior);
    CHECK(st.objective_catalog[std::max_element(st.objective_posterior.begin(), st.objective_posterior.end()) -
                               st.objective_posterior.begin()] == "journal_list_for_team");
    const auto last = result.reports.back();
    REQUIRE(last.contains("result"));
    CHECK(last["result"]["activated"] == true);
    CHECK(last["result"]["reference_year"] == 2006);

    std::istringstream bad("{\"record\":\"open\",\"user_id\":\"u\"}\n{\"seq\":1}\n");
    try {
        replay(*engine->corpus(), engine->model(), engine->config(), bad);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).rfind("line 2", 0) == 0);
    }

    // Out-of-order events are reported as rejected; the state is unchanged.
    std::istringstream unordered(R"({"seq": 2, "timestamp": "2006-01-01T00:00:00Z", "kind": "dialogue_utterance", "text": "hi"}
{"seq": 1, "timestamp": "2006-01-01T00:00:01Z", "kind": "dialogue_utterance", "text": "hi"}
)");
    auto r = replay(*engine->corpus(), engine->model(), engine->config(), unordered);
    REQUIRE(r.reports.size() == 3);
    CHECK(r.reports[2]["rejected"]["code"] == "OrderViolation");
    CHECK(r.final_state.activities.size() == 1);
}

TEST_CASE("engine persists sessions and recovers them after a restart") {
    TempDir tmp;
    const auto config = load_service_config(write_config(tmp.path));
    const auto log = scenario_log();
    std::string id;
    user::UserState before;
    {
        auto engine = Engine::load(config);
        id = engine->open_session(log[0].user_id, log[0].profile);
        for (std::size_t i = 1; i < log.size(); ++i) engine->record_activity(id, log[i].event);
        // A rejected event is not persisted.
        CHECK_THROWS_AS(engine->record_activity(id, log[1].event), Error);
        before = engine->state(id);
    }
    const auto file = tmp.path / "state" / "sessions" / (id + ".jsonl");
    REQUIRE(fs::exists(file));
    std::ifstream in(file);
    auto records = read_log(in);
    REQUIRE(records.size() == log.size());
    for (std::size_t i = 1; i < records.size(); ++i) CHECK(records[i].receipt == i);

    auto engine = Engine::load(config);
    CHECK(engine->sessions().contains(id));
    CHECK(engine->state(id) == before);
    // New ids do not collide with recovered ones, and logging continues.
    auto next = engine->open_session("u2", {});
    CHECK(next != id);
    auto more = log[1].event;
    more.seq = 100;
    engine->record_activity(id, more);
    std::ifstream again(file);
    CHECK(read_log(again).back().receipt == records.size());

    // The persisted log replays to the same state.
    std::ifstream replay_in(file);
    auto rep = replay(*engine->corpus(), engine->model(), engine->config(), replay_in);
    CHECK(rep.final_state == engine->state(id));
}

TEST_CASE("reindex swaps the corpus atomically") {
    TempDir tmp;
    const auto corpus_copy = tmp.path / "corpus.jsonl";
    fs::copy_file(testing::data_path("fixtures/scenario_corpus.jsonl"), corpus_copy);
    json j = json::parse(std::ifstream(write_config(tmp.path, false)));
    j["corpus"] = corpus_copy.string();
    std::ofstream(tmp.path / "eis.json") << j.dump();
    auto engine = Engine::load(load_service_config((tmp.path / "eis.json").string()));
    auto old = engine->corpus();
    CHECK(old->size() == 50);
    std::ofstream(corpus_copy, std::ios::app)
        << R"({"doc_id":"d999","title":"late addition","authors":["Z"],"venue_name":"ISDM","venue_type":"journal","year":2006})"
        << "\n";
    CHECK(engine->reindex() == 51);
    CHECK(engine->corpus()->size() == 51);
    CHECK(old->size() == 50);  // readers holding the old snapshot are unaffected
    std::ofstream(corpus_copy, std::ios::app) << "{broken\n";
    CHECK_THROWS_AS(engine->reindex(), Error);
    CHECK(engine->corpus()->size() == 51);
}

TEST_CASE("HTTP endpoints") {
    TempDir tmp;
    auto engine = Engine::load(load_service_config(write_config(tmp.path)));
    Running server(*engine);
    httplib::Client cli("127.0.0.1", server.port);

    auto health = cli.Get("/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(json::parse(health->body)["documents"] == 50);
    CHECK(json::parse(health->body)["status"] == "ok");

    auto missing = cli.Post("/sessions/nope/query", R"({"query":"journals"})", "application/json");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    CHECK(json::parse(missing->body)["error"]["code"] == "NotFound");

    auto opened = cli.Post("/sessions", R"({"user_id":"u1","profile":{"role":"new_phd_student"}})", "application/json");
    REQUIRE(opened);
    CHECK(opened->status == 201);
    const std::string id = json::parse(opened->body)["session_id"];
    CHECK(json::parse(opened->body)["state"]["individual_characteristics"]["role"]["source"] == "declared");

    auto bad_profile = cli.Post("/sessions", R"({"profile":{"role":"astronaut"}})", "application/json");
    CHECK(bad_profile->status == 400);
    CHECK(json::parse(bad_profile->body)["error"]["field"] == "profile.role");

    auto no_text = cli.Post("/sessions/" + id + "/activities",
                            R"({"seq":1,"timestamp":"2006-03-14T09:00:00Z","kind":"dialogue_utterance"})", "application/json");
    CHECK(no_text->status == 400);
    CHECK(json::parse(no_text->body)["error"]["code"] == "InvalidEvent");
    CHECK(json::parse(no_text->body)["error"]["field"] == "text");

    auto no_doc = cli.Post("/sessions/" + id + "/activities",
                           R"({"seq":1,"timestamp":"2006-03-14T09:00:00Z","kind":"result_clicked"})", "application/json");
    CHECK(json::parse(no_doc->body)["error"]["field"] == "doc_id");
    auto bad_ts = cli.Post("/sessions/" + id + "/activities",
                           R"({"seq":1,"timestamp":"soon","kind":"dialogue_utterance","text":"x"})", "application/json");
    CHECK(json::parse(bad_ts->body)["error"]["field"] == "timestamp");
    auto not_json = cli.Post("/sessions/" + id + "/activities", "{", "application/json");
    CHECK(not_json->status == 400);

    auto ok = cli.Post("/sessions/" + id + "/activities",
                       R"({"seq":2,"timestamp":"2006-03-14T09:00:00Z","kind":"dialogue_utterance","text":"hello"})",
                       "application/json");
    CHECK(ok->status == 200);
    auto stale = cli.Post("/sessions/" + id + "/activities",
                          R"({"seq":2,"timestamp":"2006-03-14T09:00:00Z","kind":"dialogue_utterance","text":"again"})",
                          "application/json");
    CHECK(stale->status == 409);
    CHECK(json::parse(stale->body)["error"]["code"] == "OrderViolation");

    auto state = cli.Get("/sessions/" + id + "/state");
    CHECK(state->status == 200);
    CHECK(json::parse(state->body)["activities"].size() == 1);
    CHECK(json::parse(state->body) == user::to_json(engine->state(id)));

    auto parse_err = cli.Post("/sessions/" + id + "/query", R"({"query":"(journals"})", "application/json");
    CHECK(parse_err->status == 400);
    CHECK(json::parse(parse_err->body)["error"]["code"] == "ParseError");

    auto doc = cli.Get("/corpus/docs/d001");
    CHECK(doc->status == 200);
    CHECK(json::parse(doc->body)["venue_name"] == "ISDM");
    CHECK(cli.Get("/corpus/docs/zzz")->status == 404);

    auto links = cli.Get("/corpus/docs/d001/links?type=same_venue");
    CHECK(links->status == 200);
    CHECK(json::parse(links->body)["links"] == corpus::explore(*engine->corpus(), "d001", corpus::LinkType::same_venue));
    CHECK(json::parse(cli.Get("/corpus/docs/d001/links")->body)["links"].size() == 3);
    CHECK(cli.Get("/corpus/docs/d001/links?type=cousin")->status == 400);
    CHECK(cli.Get("/corpus/docs/zzz/links?type=same_team")->status == 404);

    auto reindex = cli.Post("/admin/reindex", "", "application/json");
    CHECK(reindex->status == 200);
    CHECK(json::parse(reindex->body)["documents"] == 50);

    auto nowhere = cli.Get("/nowhere");
    CHECK(nowhere->status == 404);
    CHECK(json::parse(nowhere->body)["error"]["code"] == "NotFound");
}

TEST_CASE("scenario over HTTP equals the library pipeline and the CLI replay") {
    TempDir tmp;
    const auto config_path = write_config(tmp.path);
    auto engine = Engine::load(load_service_config(config_path));
    Running server(*engine);
    httplib::Client cli("127.0.0.1", server.port);

    const auto log = scenario_log();
    json open = {{"user_id", log[0].user_id}, {"profile", log[0].profile}};
    const std::string id = json::parse(cli.Post("/sessions", open.dump(), "application/json")->body)["session_id"];

    auto library = user::new_user_state(engine->model(), id, log[0].user_id, log[0].profile);
    std::vector<std::string> http_results, library_results;
    for (std::size_t i = 1; i < log.size(); ++i) {
        const auto& ev = log[i].event;
        auto res = cli.Post("/sessions/" + id + "/activities", user::to_json(ev).dump(), "application/json");
        REQUIRE(res->status == 200);
        library = user::apply_activity(engine->model(), library, ev, engine->corpus().get());
        CHECK(json::parse(res->body) == user::to_json(library));
        if (ev.kind != user::ActivityKind::query_issued) continue;
        auto q = cli.Post("/sessions/" + id + "/query", json{{"query", *ev.text}}.dump(), "application/json");
        REQUIRE(q->status == 200);
        http_results.push_back(json::parse(q->body).dump());
        library_results.push_back(
            adapt::to_json(adapt::compute_R(*engine->corpus(), library, corpus::parse_query(*ev.text), engine->config()))
                .dump());
    }
    REQUIRE(http_results.size() == 2);
    CHECK(http_results == library_results);

    auto cmd = run("replay " + testing::data_path("fixtures/scenario_log.jsonl") + " --corpus " +
                   testing::data_path("fixtures/scenario_corpus.jsonl") + " --config " + config_path);
    REQUIRE(cmd.status == 0);
    std::istringstream lines(cmd.output);
    std::vector<std::string> cli_results;
    for (std::string line; std::getline(lines, line);) {
        auto j = json::parse(line);
        if (j.contains("result")) cli_results.push_back(j["result"].dump());
    }
    CHECK(cli_results == http_results);
}

TEST_CASE("command line") {
    TempDir tmp;
    auto valid = run("validate-network " + testing::data_path("eis_network.json"));
    CHECK(valid.status == 0);

    auto net = json::parse(std::ifstream(testing::data_path("eis_network.json")));
    net["cpts"][0]["rows"][0][0] = 0.5;
    std::ofstream(tmp.path / "broken_net.json") << net.dump();
    auto invalid = run("validate-network " + (tmp.path / "broken_net.json").string());
    CHECK(invalid.status == 1);
    CHECK(invalid.output.find("unnormalized row") != std::string::npos);

    auto ingest = run("ingest " + testing::data_path("fixtures/scenario_corpus.jsonl"));
    CHECK(ingest.status == 0);
    CHECK(json::parse(ingest.output)["documents"] == 50);

    std::ofstream(tmp.path / "bad.jsonl")
        << R"({"doc_id":"d1","title":"t","authors":["A"],"venue_name":"V","venue_type":"journal","year":2004})" << "\n"
        << R"({"doc_id":"d2","title":"t","authors":[],"venue_name":"V","venue_type":"journal","year":2004})" << "\n";
    auto bad = run("ingest " + (tmp.path / "bad.jsonl").string());
    CHECK(bad.status != 0);
    CHECK(bad.output.find("line 2") != std::string::npos);

    CHECK(run("frobnicate").status == 2);
    CHECK(run("replay").status == 2);
    CHECK(run("ingest --bogus x").status == 2);
    CHECK(run("--help").status == 0);

    // Offline query against a persisted session, with overrides.
    const auto config_path = write_config(tmp.path);
    std::string id;
    {
        auto engine = Engine::load(load_service_config(config_path));
        const auto log = scenario_log();
        id = engine->open_session(log[0].user_id, log[0].profile);
        for (std::size_t i = 1; i < log.size(); ++i) engine->record_activity(id, log[i].event);
    }
    auto q = run("query 'list of journals research team' --session " + id + " --config " + config_path);
    REQUIRE(q.status == 0);
    CHECK(json::parse(q.output)["results"].size() == 7);
    auto capped = run("query journals --session " + id + " --config " + config_path + " --top-k 2 --tau 0.99");
    REQUIRE(capped.status == 0);
    CHECK(json::parse(capped.output)["activated"] == false);
    CHECK(json::parse(capped.output)["results"].size() <= 2);
    auto env = run("query journals --session nope --config " + config_path);
    CHECK(env.status == 1);
    CHECK(env.output.find("NotFound") != std::string::npos);
    CHECK(run("query journals --session " + id + " --config " + config_path + " --lambda 2").status == 2);

    // Replay can write counts updated with the session's completed case.
    auto counts = run("replay " + testing::data_path("fixtures/scenario_log.jsonl") + " --corpus " +
                      testing::data_path("fixtures/scenario_corpus.jsonl") + " --config " + config_path +
                      " --out " + (tmp.path / "report.jsonl").string() + " --counts-out " +
                      (tmp.path / "counts.json").string());
    CHECK(counts.status == 0);
    CHECK(fs::exists(tmp.path / "report.jsonl"));
    auto cj = json::parse(std::ifstream(tmp.path / "counts.json"));
    CHECK(cj.contains("objective"));
}
