#pragma once

#include <functional>
#include <istream>
#include <string>
#include <vector>

#include "eis/corpus/document.hpp"
#include "eis/vendor_json.hpp"

namespace eis::corpus {

using WarningSink = std::function<void(const std::string&)>;

/// Reads a JSON Lines corpus (one Document object per line; blank lines and
/// lines starting with '#' are skipped). Unknown fields are reported through
/// `warn` and ignored. Throws Error(invalid_record) with the 1-based line
/// number on malformed input.
std::vector<Document> read_corpus(std::istream& in, const WarningSink& warn = {});
std::vector<Document> read_corpus_file(const std::string& path, const WarningSink& warn = {});

nlohmann::json to_json(const Document& doc);

// Throws Error(invalid_record) naming the field at fault.
Document document_from_json(const nlohmann::json& j, const WarningSink& warn = {});

}  // namespace eis::corpus
