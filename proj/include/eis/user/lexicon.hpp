#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "eis/corpus/document.hpp"
#include "eis/dbn/network.hpp"
#include "eis/user/activity.hpp"
#include "eis/vendor_json.hpp"

namespace eis::user {

// A keyword set voting for `variable = value`. Keywords may be multi-word
// phrases; a keyword hits when its words occur contiguously in the text.
struct LexiconEntry {
    std::vector<std::string> keywords;
    std::string variable;
    std::string value;
    std::size_t min_hits = 1;
};

// All entries targeting one observable variable.
struct EvidenceLexicon {
    std::string variable;
    std::vector<LexiconEntry> entries;
};

// Number of distinct keywords of `entry` present in `words`.
std::size_t count_hits(const LexiconEntry& entry, const std::vector<std::string>& words);

/// Keyword evidence for one event. Entries meeting their min_hits vote for
/// their value; per variable the value with the most hits wins and a tie at
/// the top emits nothing. Text comes from `event.text`; for result_clicked
/// the clicked document's title, keywords and venue are used when `clicked`
/// is given.
dbn::Evidence extract_evidence(const ActivityEvent& event, const std::vector<EvidenceLexicon>& lexicons,
                               const corpus::Document* clicked = nullptr);

enum class SlotCategory { individual_characteristics, context };

// Ties a profile slot (e.g. "role") to a hidden network variable.
struct SlotBinding {
    std::string slot;
    std::string variable;
    SlotCategory category = SlotCategory::individual_characteristics;
};

/// Immutable per-deployment user-model configuration.
struct UserModel {
    std::shared_ptr<const dbn::Network> network;
    std::vector<EvidenceLexicon> lexicons;
    std::vector<SlotBinding> slots;
    std::string objective_variable = "objective";
    bool click_features = false;

    const SlotBinding* binding(const std::string& slot) const;
};

// Throws Error(config_error) when a lexicon or slot targets a variable or
// value missing from the network.
void validate_user_model(const UserModel& model);

// Lexicon config document (see docs/formats.md).
UserModel user_model_from_json(const nlohmann::json& j, std::shared_ptr<const dbn::Network> network);
UserModel read_user_model_file(const std::string& path, std::shared_ptr<const dbn::Network> network);

}  // namespace eis::user
