#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eis/corpus/document.hpp"
#include "eis/exec.hpp"

namespace eis::corpus {

// Position of a document in the index. Ordinals follow ascending doc_id
// order, so a sorted ordinal list is also sorted by doc_id.
using DocOrdinal = std::uint32_t;
using OrdinalSet = std::vector<DocOrdinal>;  // sorted, duplicate-free

enum class Attribute { author, venue_name, venue_type, year, team };

std::string_view to_string(Attribute a) noexcept;
std::optional<Attribute> parse_attribute(std::string_view s);

enum class LinkType { shared_author, same_venue, same_team };

inline constexpr LinkType kLinkTypes[] = {LinkType::shared_author, LinkType::same_venue,
                                          LinkType::same_team};

std::string_view to_string(LinkType t) noexcept;
std::optional<LinkType> parse_link_type(std::string_view s);

struct Link {
    LinkType type;
    DocOrdinal target;

    auto operator<=>(const Link&) const = default;
};

/// The information base: documents plus term, attribute and link indexes.
/// Immutable once built by ingest_corpus.
class CorpusIndex {
public:
    CorpusIndex() = default;

    std::size_t size() const noexcept { return docs_.size(); }
    bool empty() const noexcept { return docs_.empty(); }

    // Sorted by doc_id.
    const std::vector<Document>& documents() const noexcept { return docs_; }
    const Document& at(DocOrdinal ord) const { return docs_.at(ord); }

    std::optional<DocOrdinal> ordinal(std::string_view doc_id) const;
    const Document* find(std::string_view doc_id) const;

    const std::map<std::string, OrdinalSet, std::less<>>& term_postings() const noexcept {
        return terms_;
    }
    // Postings for an already-normalized term; empty when absent.
    const OrdinalSet& postings(std::string_view term) const;

    // Keys are case-folded values; year keys are decimal strings.
    const std::map<std::string, OrdinalSet, std::less<>>& attribute_index(Attribute a) const;
    const OrdinalSet& attribute_postings(Attribute a, std::string_view folded_value) const;

    const std::map<int, OrdinalSet>& year_index() const noexcept { return years_; }

    // All outgoing links of a document, sorted by (type, target).
    const std::vector<Link>& links(DocOrdinal ord) const { return links_.at(ord); }

private:
    friend CorpusIndex ingest_corpus(std::span<const Document>, Exec);

    std::vector<Document> docs_;
    std::map<std::string, DocOrdinal, std::less<>> by_id_;
    std::map<std::string, OrdinalSet, std::less<>> terms_;
    std::map<std::string, OrdinalSet, std::less<>> attrs_[5];
    std::map<int, OrdinalSet> years_;
    std::vector<std::vector<Link>> links_;
};

/// Builds the index. Throws Error(duplicate_id) naming the repeated doc_id,
/// or Error(invalid_record) carrying the zero-based record index.
CorpusIndex ingest_corpus(std::span<const Document> records, Exec exec = Exec::parallel);

/// Neighbours of `doc_id` through `type`, as doc_ids sorted ascending.
/// Throws Error(not_found) for an unknown doc_id.
std::vector<std::string> explore(const CorpusIndex& index, std::string_view doc_id, LinkType type);

// Values a document carries for an attribute, case-folded (year as decimal).
std::vector<std::string> attribute_values(const Document& doc, Attribute a);

// Normalized index terms of a document (title and keywords).
std::vector<std::string> document_terms(const Document& doc);

namespace reference {

// Pairwise O(n^2) link construction; the serial reference for the
// posting-driven kernel used by ingest_corpus.
std::vector<std::vector<Link>> build_links_pairwise(std::span<const Document> sorted_docs);

}  // namespace reference

}  // namespace eis::corpus
