#include "fixtures.hpp"

#include "eis/corpus/io.hpp"
#include "eis/dbn/io.hpp"

namespace eis::testing {

std::string data_path(const std::string& relative) { return std::string(EIS_DATA_DIR) + "/" + relative; }

std::shared_ptr<const dbn::Network> eis_network() {
    static const auto net =
        std::make_shared<const dbn::Network>(dbn::read_network_file(data_path("eis_network.json")));
    return net;
}

std::shared_ptr<const user::UserModel> eis_model() {
    static const auto model =
        std::make_shared<const user::UserModel>(user::read_user_model_file(data_path("eis_lexicon.json"), eis_network()));
    return model;
}

adapt::AdaptationConfig eis_adaptation() { return adapt::read_config_file(data_path("eis_adaptation.json")); }

const corpus::CorpusIndex& scenario_corpus() {
    static const auto index =
        corpus::ingest_corpus(corpus::read_corpus_file(data_path("fixtures/scenario_corpus.jsonl")));
    return index;
}

}  // namespace eis::testing
