#pragma once

namespace eis {

// Selects the OpenMP kernel or its single-threaded path. Results are
// identical either way; the switch exists for tests and benchmarks.
enum class Exec { serial, parallel };

}  // namespace eis
