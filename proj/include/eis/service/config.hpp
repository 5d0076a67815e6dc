#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "eis/adapt/adaptation.hpp"

namespace eis::service {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string corpus_path;
    std::string network_path;
    std::string lexicon_path;
    std::string adaptation_path;
    std::string data_dir;  // empty: no persistence
};

// Relative paths inside the file resolve against the file's directory.
// Throws Error(config_error) / Error(io_error).
ServiceConfig load_service_config(const std::string& path);

// Command-line overrides for the adaptation parameters.
struct Overrides {
    std::optional<double> lambda;
    std::optional<double> alpha;
    std::optional<double> theta;
    std::optional<double> tau;
    std::optional<std::size_t> top_k;
    std::optional<int> reference_year;

    void apply(adapt::AdaptationConfig& c) const;
};

}  // namespace eis::service
