#include "eis/corpus/index.hpp"

#include <algorithm>
#include <set>

#include "eis/error.hpp"
#include "eis/text.hpp"

namespace eis::corpus {
namespace {

const OrdinalSet kEmptySet;

constexpr std::size_t slot(Attribute a) { return static_cast<std::size_t>(a); }

void sort_unique(OrdinalSet& s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
}

Attribute attribute_for(LinkType t) {
    switch (t) {
    case LinkType::shared_author: return Attribute::author;
    case LinkType::same_venue: return Attribute::venue_name;
    case LinkType::same_team: return Attribute::team;
    }
    return Attribute::author;
}

}  // namespace

std::string_view to_string(Attribute a) noexcept {
    switch (a) {
    case Attribute::author: return "author";
    case Attribute::venue_name: return "venue_name";
    case Attribute::venue_type: return "venue_type";
    case Attribute::year: return "year";
    case Attribute::team: return "team";
    }
    return "author";
}

std::optional<Attribute> parse_attribute(std::string_view s) {
    for (auto a : {Attribute::author, Attribute::venue_name, Attribute::venue_type,
                   Attribute::year, Attribute::team})
        if (to_string(a) == s) return a;
    return std::nullopt;
}

std::string_view to_string(LinkType t) noexcept {
    switch (t) {
    case LinkType::shared_author: return "shared_author";
    case LinkType::same_venue: return "same_venue";
    case LinkType::same_team: return "same_team";
    }
    return "shared_author";
}

std::optional<LinkType> parse_link_type(std::string_view s) {
    for (auto t : kLinkTypes)
        if (to_string(t) == s) return t;
    return std::nullopt;
}

std::vector<std::string> attribute_values(const Document& doc, Attribute a) {
    std::vector<std::string> out;
    switch (a) {
    case Attribute::author:
        for (const auto& v : doc.authors) out.push_back(text::fold_case(v));
        break;
    case Attribute::venue_name: out.push_back(text::fold_case(doc.venue_name)); break;
    case Attribute::venue_type: out.emplace_back(to_string(doc.venue_type)); break;
    case Attribute::year: out.push_back(std::to_string(doc.year)); break;
    case Attribute::team:
        for (const auto& v : doc.team_ids) out.push_back(text::fold_case(v));
        break;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::string> document_terms(const Document& doc) {
    auto terms = text::index_tokens(doc.title);
    for (const auto& kw : doc.keywords) {
        auto more = text::index_tokens(kw);
        terms.insert(terms.end(), more.begin(), more.end());
    }
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    return terms;
}

std::optional<DocOrdinal> CorpusIndex::ordinal(std::string_view doc_id) const {
    auto it = by_id_.find(doc_id);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

const Document* CorpusIndex::find(std::string_view doc_id) const {
    auto ord = ordinal(doc_id);
    return ord ? &docs_[*ord] : nullptr;
}

const OrdinalSet& CorpusIndex::postings(std::string_view term) const {
    auto it = terms_.find(term);
    return it == terms_.end() ? kEmptySet : it->second;
}

const std::map<std::string, OrdinalSet, std::less<>>& CorpusIndex::attribute_index(
    Attribute a) const {
    return attrs_[slot(a)];
}

const OrdinalSet& CorpusIndex::attribute_postings(Attribute a, std::string_view value) const {
    const auto& m = attrs_[slot(a)];
    auto it = m.find(value);
    return it == m.end() ? kEmptySet : it->second;
}

CorpusIndex ingest_corpus(std::span<const Document> records, Exec exec) {
    std::map<std::string, std::size_t, std::less<>> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (auto v = find_violation(records[i]))
            throw Error(ErrorCode::invalid_record,
                        "record " + std::to_string(i) + ": " + *v, std::to_string(i));
        auto [it, fresh] = seen.emplace(records[i].doc_id, i);
        if (!fresh)
            throw Error(ErrorCode::duplicate_id,
                        "duplicate doc_id '" + records[i].doc_id + "' (records " +
                            std::to_string(it->second) + " and " + std::to_string(i) + ")",
                        records[i].doc_id);
    }

    CorpusIndex idx;
    idx.docs_.assign(records.begin(), records.end());
    std::sort(idx.docs_.begin(), idx.docs_.end(),
              [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });

    const auto n = static_cast<DocOrdinal>(idx.docs_.size());
    for (DocOrdinal ord = 0; ord < n; ++ord) {
        const auto& d = idx.docs_[ord];
        idx.by_id_.emplace(d.doc_id, ord);
        for (auto& t : document_terms(d)) idx.terms_[t].push_back(ord);
        for (auto a : {Attribute::author, Attribute::venue_name, Attribute::venue_type,
                       Attribute::year, Attribute::team})
            for (auto& v : attribute_values(d, a)) idx.attrs_[slot(a)][v].push_back(ord);
        idx.years_[d.year].push_back(ord);
    }
    // Ordinals were appended in increasing order, so every list is already
    // sorted and duplicate-free.

    // Link kernel: each document collects its neighbours from the postings of
    // its own attribute values. Rows are independent.
    idx.links_.assign(n, {});
    const bool parallel = exec == Exec::parallel;
#pragma omp parallel for schedule(dynamic, 16) if (parallel)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        const auto ord = static_cast<DocOrdinal>(i);
        std::vector<Link> row;
        for (auto type : kLinkTypes) {
            const auto attr = attribute_for(type);
            OrdinalSet neigh;
            for (const auto& v : attribute_values(idx.docs_[ord], attr)) {
                const auto& p = idx.attrs_[slot(attr)].find(v)->second;
                neigh.insert(neigh.end(), p.begin(), p.end());
            }
            sort_unique(neigh);
            for (auto o : neigh)
                if (o != ord) row.push_back({type, o});
        }
        idx.links_[ord] = std::move(row);
    }
    return idx;
}

std::vector<std::string> explore(const CorpusIndex& index, std::string_view doc_id, LinkType type) {
    auto ord = index.ordinal(doc_id);
    if (!ord)
        throw Error(ErrorCode::not_found, "unknown doc_id '" + std::string(doc_id) + "'",
                    std::string(doc_id));
    std::vector<std::string> out;
    for (const auto& l : index.links(*ord))
        if (l.type == type) out.push_back(index.at(l.target).doc_id);
    return out;
}

namespace reference {

std::vector<std::vector<Link>> build_links_pairwise(std::span<const Document> docs) {
    auto shares = [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
        for (const auto& x : a)
            if (std::find(b.begin(), b.end(), x) != b.end()) return true;
        return false;
    };
    std::vector<std::vector<Link>> links(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        for (auto type : kLinkTypes) {
            const auto attr = attribute_for(type);
            const auto mine = attribute_values(docs[i], attr);
            for (std::size_t j = 0; j < docs.size(); ++j) {
                if (i == j) continue;
                if (shares(mine, attribute_values(docs[j], attr)))
                    links[i].push_back({type, static_cast<DocOrdinal>(j)});
            }
        }
    }
    return links;
}

}  // namespace reference

}  // namespace eis::corpus
