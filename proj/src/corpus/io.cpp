#include "eis/corpus/io.hpp"

#include <fstream>
#include <set>

#include "eis/error.hpp"

namespace eis::corpus {
namespace {

using nlohmann::json;

const std::set<std::string, std::less<>> kKnownFields = {
    "doc_id", "title", "authors", "venue_name", "venue_type", "year", "keywords", "team_ids"};

[[noreturn]] void bad(const std::string& field, const std::string& why) {
    throw Error(ErrorCode::invalid_record, "field '" + field + "': " + why, field);
}

std::string get_string(const json& j, const char* field, bool required) {
    auto it = j.find(field);
    if (it == j.end()) {
        if (required) bad(field, "missing");
        return {};
    }
    if (!it->is_string()) bad(field, "expected a string");
    return it->get<std::string>();
}

std::vector<std::string> get_list(const json& j, const char* field, bool required) {
    auto it = j.find(field);
    if (it == j.end()) {
        if (required) bad(field, "missing");
        return {};
    }
    if (!it->is_array()) bad(field, "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string()) bad(field, "expected an array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

Document document_from_json(const json& j, const WarningSink& warn) {
    if (!j.is_object()) throw Error(ErrorCode::invalid_record, "record is not an object");
    Document d;
    d.doc_id = get_string(j, "doc_id", true);
    d.title = get_string(j, "title", true);
    d.authors = get_list(j, "authors", true);
    d.venue_name = get_string(j, "venue_name", true);
    const auto vt = get_string(j, "venue_type", true);
    auto parsed = parse_venue_type(vt);
    if (!parsed) bad("venue_type", "unknown value '" + vt + "'");
    d.venue_type = *parsed;
    auto y = j.find("year");
    if (y == j.end()) bad("year", "missing");
    if (!y->is_number_integer()) bad("year", "expected an integer");
    d.year = y->get<int>();
    d.keywords = get_list(j, "keywords", false);
    d.team_ids = get_list(j, "team_ids", false);
    if (warn)
        for (const auto& [k, _] : j.items())
            if (!kKnownFields.contains(k)) warn("unknown field '" + k + "' ignored");
    return d;
}

json to_json(const Document& d) {
    return json{{"doc_id", d.doc_id},         {"title", d.title},
                {"authors", d.authors},       {"venue_name", d.venue_name},
                {"venue_type", to_string(d.venue_type)}, {"year", d.year},
                {"keywords", d.keywords},     {"team_ids", d.team_ids}};
}

std::vector<Document> read_corpus(std::istream& in, const WarningSink& warn) {
    std::vector<Document> docs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto where = "line " + std::to_string(lineno);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::invalid_record, where + ": malformed JSON (" + e.what() + ")",
                        std::to_string(lineno));
        }
        try {
            WarningSink line_warn;
            if (warn) line_warn = [&](const std::string& m) { warn(where + ": " + m); };
            auto doc = document_from_json(j, line_warn);
            if (auto v = find_violation(doc)) throw Error(ErrorCode::invalid_record, *v);
            docs.push_back(std::move(doc));
        } catch (const Error& e) {
            throw Error(ErrorCode::invalid_record, where + ": " + e.what(), std::to_string(lineno));
        }
    }
    return docs;
}

std::vector<Document> read_corpus_file(const std::string& path, const WarningSink& warn) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open corpus file '" + path + "'", path);
    return read_corpus(in, warn);
}

}  // namespace eis::corpus
