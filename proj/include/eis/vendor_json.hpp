#pragma once

// Single include point for nlohmann/json; prefers the vendored copy.
#if __has_include(<json.hpp>)
#include <json.hpp>
#else
#include <nlohmann/json.hpp>
#endif
