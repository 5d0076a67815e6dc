#include "eis/dbn/io.hpp"

#include <fstream>

#include "eis/error.hpp"

namespace eis::dbn {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::invalid_spec, "network spec: " + what); }

const json& member(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) bad(std::string("missing '") + key + "'");
    return *it;
}

std::vector<double> numbers(const json& j, const std::string& where) {
    if (!j.is_array()) bad(where + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : j) {
        if (!x.is_number()) bad(where + " must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

std::vector<Edge> edges(const json& j, const char* key) {
    std::vector<Edge> out;
    auto it = j.find(key);
    if (it == j.end()) return out;
    if (!it->is_array()) bad(std::string(key) + " must be an array");
    for (const auto& e : *it) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
            bad(std::string(key) + " entries are [parent, child] pairs");
        out.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
    }
    return out;
}

}  // namespace

NetworkSpec network_from_json(const json& j) {
    if (!j.is_object()) bad("document must be an object");
    NetworkSpec spec;
    for (const auto& v : member(j, "variables")) {
        Variable var;
        if (!v.is_object()) bad("variables entries must be objects");
        var.name = member(v, "name").get<std::string>();
        for (const auto& d : member(v, "domain")) var.domain.push_back(d.get<std::string>());
        const auto kind = v.value("kind", std::string("hidden"));
        if (kind == "hidden") var.kind = VarKind::hidden;
        else if (kind == "observed") var.kind = VarKind::observed;
        else bad("variable '" + var.name + "': unknown kind '" + kind + "'");
        const auto dyn = v.value("dynamics", std::string("temporal"));
        if (dyn == "static") var.dynamics = Dynamics::static_;
        else if (dyn == "temporal") var.dynamics = Dynamics::temporal;
        else bad("variable '" + var.name + "': unknown dynamics '" + dyn + "'");
        spec.variables.push_back(std::move(var));
    }
    spec.intra_edges = edges(j, "intra_edges");
    spec.inter_edges = edges(j, "inter_edges");
    if (auto it = j.find("priors"); it != j.end()) {
        if (!it->is_object()) bad("priors must be an object");
        for (const auto& [name, p] : it->items()) spec.priors[name] = numbers(p, "prior '" + name + "'");
    }
    if (auto it = j.find("cpts"); it != j.end()) {
        for (const auto& c : *it) {
            Cpt cpt;
            cpt.variable = member(c, "variable").get<std::string>();
            if (auto ps = c.find("parents"); ps != c.end()) {
                for (const auto& p : *ps) {
                    if (p.is_string()) {
                        cpt.parents.push_back({p.get<std::string>(), 0});
                    } else {
                        cpt.parents.push_back({member(p, "name").get<std::string>(), p.value("lag", 0)});
                    }
                }
            }
            const auto& rows = member(c, "rows");
            if (!rows.is_array()) bad("cpt '" + cpt.variable + "': rows must be an array");
            for (const auto& r : rows) cpt.rows.push_back(numbers(r, "cpt '" + cpt.variable + "' row"));
            spec.cpts.push_back(std::move(cpt));
        }
    }
    return spec;
}

json to_json(const NetworkSpec& spec) {
    json vars = json::array();
    for (const auto& v : spec.variables)
        vars.push_back({{"name", v.name},
                        {"domain", v.domain},
                        {"kind", v.kind == VarKind::hidden ? "hidden" : "observed"},
                        {"dynamics", v.dynamics == Dynamics::static_ ? "static" : "temporal"}});
    auto edge_list = [](const std::vector<Edge>& es) {
        json out = json::array();
        for (const auto& e : es) out.push_back({e.parent, e.child});
        return out;
    };
    json cpts = json::array();
    for (const auto& c : spec.cpts) {
        json parents = json::array();
        for (const auto& p : c.parents) parents.push_back({{"name", p.name}, {"lag", p.lag}});
        cpts.push_back({{"variable", c.variable}, {"parents", parents}, {"rows", c.rows}});
    }
    return json{{"variables", vars},
                {"intra_edges", edge_list(spec.intra_edges)},
                {"inter_edges", edge_list(spec.inter_edges)},
                {"priors", spec.priors},
                {"cpts", cpts}};
}

NetworkSpec read_network_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open network spec '" + path + "'", path);
    try {
        return network_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_spec, "network spec '" + path + "': " + e.what(), path);
    }
}

json to_json(const CountTable& counts) { return json(counts.counts()); }

CountTable counts_from_json(const Network& net, const json& j) {
    try {
        return CountTable::from_counts(net, j.get<std::map<std::string, std::vector<std::vector<double>>>>());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::case_error, std::string("count table: ") + e.what());
    }
}

}  // namespace eis::dbn
