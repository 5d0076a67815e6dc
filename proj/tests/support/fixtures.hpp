#pragma once

#include <memory>
#include <string>

#include "eis/adapt/adaptation.hpp"
#include "eis/corpus/index.hpp"
#include "eis/user/lexicon.hpp"

namespace eis::testing {

std::string data_path(const std::string& relative);

// The shipped EIS network, lexicon and adaptation config.
std::shared_ptr<const dbn::Network> eis_network();
std::shared_ptr<const user::UserModel> eis_model();
adapt::AdaptationConfig eis_adaptation();

// The 50-document scenario corpus.
const corpus::CorpusIndex& scenario_corpus();

}  // namespace eis::testing
