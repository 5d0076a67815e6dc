#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eis::dbn {

enum class VarKind { hidden, observed };
enum class Dynamics { static_, temporal };

struct Variable {
    std::string name;
    std::vector<std::string> domain;
    VarKind kind = VarKind::hidden;
    Dynamics dynamics = Dynamics::temporal;

    bool operator==(const Variable&) const = default;
};

struct Edge {
    std::string parent;
    std::string child;

    bool operator==(const Edge&) const = default;
};

// A CPT parent: `lag` 0 is the same slice, 1 the previous slice.
struct ParentRef {
    std::string name;
    int lag = 0;

    bool operator==(const ParentRef&) const = default;
};

/// Conditional table for one variable. Rows enumerate parent assignments in
/// row-major order over `parents` (the last parent varies fastest); each row
/// is a distribution over the variable's domain.
struct Cpt {
    std::string variable;
    std::vector<ParentRef> parents;
    std::vector<std::vector<double>> rows;

    bool operator==(const Cpt&) const = default;
};

/// Declarative two-slice network. Static hidden variables keep their slice-0
/// value forever; temporal hidden variables are redrawn each slice from their
/// CPT; observed variables are leaves with same-slice hidden parents.
struct NetworkSpec {
    std::vector<Variable> variables;
    std::vector<Edge> intra_edges;
    std::vector<Edge> inter_edges;
    std::vector<Cpt> cpts;
    std::map<std::string, std::vector<double>> priors;  // slice 0, every hidden variable

    bool operator==(const NetworkSpec&) const = default;

    const Variable* find(std::string_view name) const;
    const Cpt* find_cpt(std::string_view variable) const;
};

inline constexpr double kRowTolerance = 1e-9;
inline constexpr double kOutputTolerance = 1e-12;

struct Violation {
    std::string kind;     // "cycle", "unnormalized row", ...
    std::string subject;  // variable name, with "[row]" when row-specific
    std::string message;
};

std::vector<Violation> validate_network(const NetworkSpec& spec);

// Evidence for one slice: variable -> value. Observed variables contribute
// their CPT likelihood; a hidden variable in evidence is clamped.
using Evidence = std::map<std::string, std::string>;

/// A validated network compiled into index form. Hidden variables keep spec
/// order in the joint index, the first one varying slowest.
class Network {
public:
    // Throws Error(invalid_spec) listing every violation.
    explicit Network(NetworkSpec spec);

    const NetworkSpec& spec() const noexcept { return spec_; }

    const std::vector<std::size_t>& hidden() const noexcept { return hidden_; }
    std::size_t joint_size() const noexcept { return joint_size_; }

    std::optional<std::size_t> variable_index(std::string_view name) const;
    const Variable& variable(std::size_t i) const { return spec_.variables[i]; }
    std::optional<std::size_t> value_index(std::size_t var, std::string_view value) const;

    // Position of a variable among the hidden ones, if hidden.
    std::optional<std::size_t> hidden_position(std::size_t var) const;

    // Value of the hidden variable at `hidden_pos` within joint state `state`.
    std::size_t hidden_value(std::size_t state, std::size_t hidden_pos) const {
        return (state / strides_[hidden_pos]) % radices_[hidden_pos];
    }
    std::size_t stride(std::size_t hidden_pos) const { return strides_[hidden_pos]; }
    std::size_t radix(std::size_t hidden_pos) const { return radices_[hidden_pos]; }

    // Evidence resolved to (variable index, value index) pairs. Throws
    // Error(evidence_error) for unknown variables or out-of-domain values.
    std::vector<std::pair<std::size_t, std::size_t>> resolve(const Evidence& e) const;

    // Compiled CPT of a variable: row index of a (previous, current) joint
    // state pair and the flat row table.
    struct CompiledCpt {
        std::size_t variable = 0;
        std::vector<std::size_t> parent_hidden;  // hidden positions
        std::vector<int> parent_lag;
        std::vector<std::size_t> parent_stride;  // row-major multipliers
        std::vector<std::vector<double>> rows;
        std::vector<std::vector<double>> log_rows;

        std::size_t row_of(const Network& net, std::size_t prev, std::size_t cur) const;
    };

    // Non-null for temporal hidden and observed variables.
    const CompiledCpt* cpt(std::size_t var) const {
        return cpt_slot_[var] < 0 ? nullptr : &cpts_[static_cast<std::size_t>(cpt_slot_[var])];
    }
    const std::vector<CompiledCpt>& compiled_cpts() const noexcept { return cpts_; }

private:
    NetworkSpec spec_;
    std::map<std::string, std::size_t, std::less<>> by_name_;
    std::vector<std::size_t> hidden_;
    std::vector<std::ptrdiff_t> hidden_pos_;
    std::vector<std::size_t> strides_;
    std::vector<std::size_t> radices_;
    std::size_t joint_size_ = 1;
    std::vector<CompiledCpt> cpts_;
    std::vector<std::ptrdiff_t> cpt_slot_;
};

}  // namespace eis::dbn
