#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "eis/corpus/index.hpp"

namespace eis::corpus {

enum class CmpOp { ge, le, eq };

std::string_view to_string(CmpOp op) noexcept;  // ">=", "<=", "="

/// Boolean query tree. Leaves are Term, AttrEq and AttrCmp; inner nodes are
/// And/Or (two children) and Not (one child). Value type; copies are deep.
class BooleanQuery {
public:
    enum class Kind { term, attr_eq, attr_cmp, and_, or_, not_ };

    static BooleanQuery term(std::string text);
    static BooleanQuery attr_eq(std::string attribute, std::string value);
    static BooleanQuery attr_cmp(std::string attribute, CmpOp op, long long value);
    static BooleanQuery conj(BooleanQuery lhs, BooleanQuery rhs);
    static BooleanQuery disj(BooleanQuery lhs, BooleanQuery rhs);
    static BooleanQuery negate(BooleanQuery operand);

    Kind kind() const noexcept { return kind_; }
    bool is_leaf() const noexcept { return children_.empty(); }

    // Term text, or the attribute name for AttrEq / AttrCmp.
    const std::string& text() const noexcept { return text_; }
    const std::string& attribute() const noexcept { return text_; }
    const std::string& value() const noexcept { return value_; }
    CmpOp op() const noexcept { return op_; }
    long long number() const noexcept { return number_; }

    const BooleanQuery& lhs() const { return children_.at(0); }
    const BooleanQuery& rhs() const { return children_.at(1); }
    const BooleanQuery& operand() const { return children_.at(0); }

    bool operator==(const BooleanQuery&) const = default;

private:
    Kind kind_ = Kind::term;
    std::string text_;
    std::string value_;
    CmpOp op_ = CmpOp::eq;
    long long number_ = 0;
    std::vector<BooleanQuery> children_;
};

/// Parses the query language:
///
///   query   := or ;  or := and ("OR" and)* ;  and := unary (["AND"] unary)*
///   unary   := "NOT" unary | "(" or ")" | attr op value | word
///   op      := "=" | ">=" | "<="
///
/// AND binds tighter than OR; juxtaposition is an implicit AND. Keywords are
/// upper case. Values may be double-quoted with \" and \\ escapes. Bare words
/// become Term leaves holding the normalized term.
///
/// Throws Error(empty_query) for blank input and ParseError (with the byte
/// position) for syntax errors, unknown attributes and a bare top-level NOT.
BooleanQuery parse_query(std::string_view text);

// Canonical text form; parse_query(render(q)) == q for any parsed q.
std::string render(const BooleanQuery& q);

// Structural dump used in tests and diagnostics, e.g. And(Term(a),Not(Term(b))).
std::string debug_string(const BooleanQuery& q);

/// Set of documents satisfying q; Not is the complement within the corpus.
/// Throws Error(evaluation_error) for attributes the index does not know.
OrdinalSet evaluate(const CorpusIndex& index, const BooleanQuery& q);

// evaluate() mapped to doc_ids, ascending.
std::vector<std::string> evaluate_query(const CorpusIndex& index, const BooleanQuery& q);

// Single-document predicate with the same semantics as evaluate().
bool matches(const Document& doc, const BooleanQuery& q);

}  // namespace eis::corpus
