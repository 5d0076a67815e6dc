#include "eis/corpus/document.hpp"

#include <algorithm>

namespace eis::corpus {

std::string_view to_string(VenueType v) noexcept {
    switch (v) {
    case VenueType::journal: return "journal";
    case VenueType::conference: return "conference";
    case VenueType::thesis: return "thesis";
    case VenueType::report: return "report";
    case VenueType::other: return "other";
    }
    return "other";
}

std::optional<VenueType> parse_venue_type(std::string_view s) {
    for (auto v : {VenueType::journal, VenueType::conference, VenueType::thesis,
                   VenueType::report, VenueType::other})
        if (to_string(v) == s) return v;
    return std::nullopt;
}

std::optional<std::string> find_violation(const Document& doc) {
    if (doc.doc_id.empty()) return "doc_id is empty";
    if (doc.year < kMinYear || doc.year > kMaxYear)
        return "year " + std::to_string(doc.year) + " outside [1900, 2100]";
    if (doc.authors.empty()) return "authors is empty";
    if (std::any_of(doc.authors.begin(), doc.authors.end(),
                    [](const std::string& a) { return a.empty(); }))
        return "authors contains an empty identifier";
    return std::nullopt;
}

}  // namespace eis::corpus
