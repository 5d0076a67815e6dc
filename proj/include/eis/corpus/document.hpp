#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eis::corpus {

enum class VenueType { journal, conference, thesis, report, other };

std::string_view to_string(VenueType v) noexcept;
std::optional<VenueType> parse_venue_type(std::string_view s);

/// One publication record of the information base.
struct Document {
    std::string doc_id;
    std::string title;
    std::vector<std::string> authors;
    std::string venue_name;
    VenueType venue_type = VenueType::other;
    int year = 0;
    std::vector<std::string> keywords;
    std::vector<std::string> team_ids;

    bool operator==(const Document&) const = default;
};

inline constexpr int kMinYear = 1900;
inline constexpr int kMaxYear = 2100;

// First violated record invariant, or nullopt when the record is valid.
std::optional<std::string> find_violation(const Document& doc);

}  // namespace eis::corpus
