#pragma once

#include <string>

#include "eis/dbn/inference.hpp"
#include "eis/dbn/learning.hpp"
#include "eis/dbn/network.hpp"
#include "eis/vendor_json.hpp"

namespace eis::dbn {

// Network-spec documents; the grammar is described in docs/formats.md.
// Structural problems throw Error(invalid_spec); semantic checks are left to
// validate_network.
NetworkSpec network_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NetworkSpec& spec);
NetworkSpec read_network_file(const std::string& path);

nlohmann::json to_json(const CountTable& counts);
CountTable counts_from_json(const Network& net, const nlohmann::json& j);

}  // namespace eis::dbn
