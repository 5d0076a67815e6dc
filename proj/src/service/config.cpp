#include "eis/service/config.hpp"

#include <filesystem>
#include <fstream>

#include "eis/error.hpp"

namespace eis::service {

namespace fs = std::filesystem;

ServiceConfig load_service_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open config '" + path + "'", "config");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::config_error, path + ": " + e.what(), "config");
    }
    if (!j.is_object()) throw Error(ErrorCode::config_error, path + ": config must be an object", "config");

    const fs::path base = fs::absolute(fs::path(path)).parent_path();
    auto resolve = [&](const std::string& p) {
        if (p.empty()) return p;
        fs::path q(p);
        return (q.is_absolute() ? q : base / q).lexically_normal().string();
    };
    auto str = [&](const char* key, bool required) {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) {
            if (required) throw Error(ErrorCode::config_error, std::string("missing '") + key + "'", key);
            return std::string();
        }
        if (!it->is_string()) throw Error(ErrorCode::config_error, std::string("'") + key + "' must be a string", key);
        return it->get<std::string>();
    };

    ServiceConfig c;
    if (auto h = str("host", false); !h.empty()) c.host = h;
    if (auto it = j.find("port"); it != j.end()) {
        if (!it->is_number_integer() || it->get<long long>() < 0 || it->get<long long>() > 65535)
            throw Error(ErrorCode::config_error, "'port' must be an integer in [0, 65535]", "port");
        c.port = it->get<int>();
    }
    c.corpus_path = resolve(str("corpus", true));
    c.network_path = resolve(str("network", true));
    c.lexicon_path = resolve(str("lexicon", true));
    c.adaptation_path = resolve(str("adaptation", true));
    c.data_dir = resolve(str("data_dir", false));
    return c;
}

void Overrides::apply(adapt::AdaptationConfig& c) const {
    if (lambda) c.lambda = *lambda;
    if (alpha) c.alpha = *alpha;
    if (theta) c.theta = *theta;
    if (tau) c.tau = *tau;
    if (top_k) c.top_k = *top_k;
    if (reference_year) c.reference_year = *reference_year;
}

}  // namespace eis::service
