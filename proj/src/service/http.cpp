#include "eis/service/http.hpp"

#include <httplib.h>

#include "eis/corpus/io.hpp"
#include "eis/error.hpp"

namespace eis::service {

int http_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::not_found: return 404;
        case ErrorCode::order_violation: return 409;
        case ErrorCode::adaptation_error:
        case ErrorCode::invalid_record:
        case ErrorCode::duplicate_id: return 422;
        case ErrorCode::config_error:
        case ErrorCode::io_error:
        case ErrorCode::summary_error:
        case ErrorCode::fusion_error:
        case ErrorCode::space_too_large: return 500;
        default: return 400;
    }
}

nlohmann::json error_body(const Error& e) {
    nlohmann::json err = {{"code", to_string(e.code())}, {"message", e.what()}};
    err["field"] = e.field().empty() ? nlohmann::json(nullptr) : nlohmann::json(e.field());
    return {{"error", err}};
}

namespace {

void send(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, const Error& e) { send(res, http_status(e.code()), error_body(e)); }

nlohmann::json parse_body(const httplib::Request& req, bool allow_empty) {
    if (req.body.empty() && allow_empty) return nlohmann::json::object();
    try {
        auto j = nlohmann::json::parse(req.body);
        if (!j.is_object()) throw Error(ErrorCode::invalid_event, "request body must be a JSON object", "body");
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_event, std::string("malformed JSON body: ") + e.what(), "body");
    }
}

// Wraps a handler so that library errors become structured JSON responses.
template <class F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const Error& e) {
            fail(res, e);
        } catch (const std::exception& e) {
            send(res, 500, {{"error", {{"code", "Internal"}, {"message", e.what()}, {"field", nullptr}}}});
        }
    };
}

nlohmann::json links_json(const corpus::CorpusIndex& index, const std::string& doc_id, corpus::LinkType type) {
    return corpus::explore(index, doc_id, type);
}

}  // namespace

HttpService::HttpService(Engine& engine) : engine_(engine), server_(std::make_unique<httplib::Server>()) {
    install_routes();
}

HttpService::~HttpService() { stop(); }

void HttpService::install_routes() {
    auto& s = *server_;

    s.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req, true);
        std::string user_id;
        user::Profile profile;
        if (auto it = body.find("user_id"); it != body.end() && !it->is_null()) {
            if (!it->is_string()) throw Error(ErrorCode::invalid_event, "'user_id' must be a string", "user_id");
            user_id = it->get<std::string>();
        }
        if (auto it = body.find("profile"); it != body.end() && !it->is_null()) {
            if (!it->is_object()) throw Error(ErrorCode::invalid_event, "'profile' must be an object", "profile");
            for (const auto& [k, v] : it->items()) {
                if (!v.is_string())
                    throw Error(ErrorCode::invalid_event, "profile slot '" + k + "' must be a string", "profile");
                profile[k] = v.get<std::string>();
            }
        }
        auto id = engine_.open_session(user_id, profile);
        send(res, 201, {{"session_id", id}, {"state", user::to_json(engine_.state(id))}});
    }));

    s.Post("/sessions/:id/activities", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto& id = req.path_params.at("id");
        auto event = user::event_from_json(parse_body(req, false));
        send(res, 200, user::to_json(engine_.record_activity(id, std::move(event))));
    }));

    s.Post("/sessions/:id/query", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto& id = req.path_params.at("id");
        auto body = parse_body(req, false);
        auto it = body.find("query");
        if (it == body.end() || !it->is_string())
            throw Error(ErrorCode::empty_query, "'query' must be a string", "query");
        send(res, 200, adapt::to_json(engine_.query(id, it->get<std::string>())));
    }));

    s.Get("/sessions/:id/state", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send(res, 200, user::to_json(engine_.state(req.path_params.at("id"))));
    }));

    s.Get("/corpus/docs/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto& id = req.path_params.at("id");
        auto index = engine_.corpus();
        const auto* doc = index->find(id);
        if (!doc) throw Error(ErrorCode::not_found, "unknown document '" + id + "'", "doc_id");
        send(res, 200, corpus::to_json(*doc));
    }));

    s.Get("/corpus/docs/:id/links", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto& id = req.path_params.at("id");
        auto index = engine_.corpus();
        nlohmann::json body = {{"doc_id", id}};
        if (req.has_param("type")) {
            const auto name = req.get_param_value("type");
            auto type = corpus::parse_link_type(name);
            if (!type) throw Error(ErrorCode::invalid_event, "unknown link type '" + name + "'", "type");
            body["type"] = name;
            body["links"] = links_json(*index, id, *type);
        } else {
            nlohmann::json all = nlohmann::json::object();
            for (auto t : corpus::kLinkTypes) all[std::string(corpus::to_string(t))] = links_json(*index, id, t);
            body["links"] = all;
        }
        send(res, 200, body);
    }));

    s.Post("/admin/reindex", guarded([this](const httplib::Request&, httplib::Response& res) {
        send(res, 200, {{"status", "ok"}, {"documents", engine_.reindex()}});
    }));

    s.Get("/health", guarded([this](const httplib::Request&, httplib::Response& res) {
        send(res, 200,
             {{"status", "ok"},
              {"documents", engine_.corpus()->size()},
              {"sessions", engine_.sessions().session_ids().size()}});
    }));

    s.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (!res.body.empty()) return;
        nlohmann::json err = {{"code", res.status == 404 ? "NotFound" : "HttpError"},
                              {"message", "no route for " + req.method + " " + req.path},
                              {"field", nullptr}};
        res.set_content(nlohmann::json{{"error", err}}.dump(), "application/json");
    });
}

void HttpService::listen(const std::string& host, int port) {
    if (!server_->bind_to_port(host, port))
        throw Error(ErrorCode::io_error, "cannot bind " + host + ":" + std::to_string(port), "port");
    server_->listen_after_bind();
}

int HttpService::bind_any(const std::string& host) {
    int port = server_->bind_to_any_port(host);
    if (port < 0) throw Error(ErrorCode::io_error, "cannot bind " + host, "port");
    return port;
}

void HttpService::run() { server_->listen_after_bind(); }

void HttpService::wait_until_ready() const { server_->wait_until_ready(); }

void HttpService::stop() {
    if (server_ && server_->is_running()) server_->stop();
}

}  // namespace eis::service
