#include "eis/corpus/query.hpp"

#include <algorithm>
#include <charconv>
#include <iterator>

#include "eis/error.hpp"
#include "eis/text.hpp"

namespace eis::corpus {

std::string_view to_string(CmpOp op) noexcept {
    switch (op) {
    case CmpOp::ge: return ">=";
    case CmpOp::le: return "<=";
    case CmpOp::eq: return "=";
    }
    return "=";
}

BooleanQuery BooleanQuery::term(std::string text) {
    BooleanQuery q;
    q.kind_ = Kind::term;
    q.text_ = std::move(text);
    return q;
}

BooleanQuery BooleanQuery::attr_eq(std::string attribute, std::string value) {
    BooleanQuery q;
    q.kind_ = Kind::attr_eq;
    q.text_ = std::move(attribute);
    q.value_ = std::move(value);
    return q;
}

BooleanQuery BooleanQuery::attr_cmp(std::string attribute, CmpOp op, long long value) {
    BooleanQuery q;
    q.kind_ = Kind::attr_cmp;
    q.text_ = std::move(attribute);
    q.op_ = op;
    q.number_ = value;
    return q;
}

BooleanQuery BooleanQuery::conj(BooleanQuery lhs, BooleanQuery rhs) {
    BooleanQuery q;
    q.kind_ = Kind::and_;
    q.children_.push_back(std::move(lhs));
    q.children_.push_back(std::move(rhs));
    return q;
}

BooleanQuery BooleanQuery::disj(BooleanQuery lhs, BooleanQuery rhs) {
    BooleanQuery q;
    q.kind_ = Kind::or_;
    q.children_.push_back(std::move(lhs));
    q.children_.push_back(std::move(rhs));
    return q;
}

BooleanQuery BooleanQuery::negate(BooleanQuery operand) {
    BooleanQuery q;
    q.kind_ = Kind::not_;
    q.children_.push_back(std::move(operand));
    return q;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok { lparen, rparen, op, word, quoted, end };

struct Token {
    Tok kind;
    std::string text;
    std::size_t pos;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
bool is_delim(char c) { return is_space(c) || c == '(' || c == ')' || c == '=' || c == '<' || c == '>' || c == '"'; }

std::vector<Token> lex(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (is_space(c)) {
            ++i;
        } else if (c == '(') {
            out.push_back({Tok::lparen, "(", i++});
        } else if (c == ')') {
            out.push_back({Tok::rparen, ")", i++});
        } else if (c == '=') {
            out.push_back({Tok::op, "=", i++});
        } else if (c == '<' || c == '>') {
            if (i + 1 >= s.size() || s[i + 1] != '=')
                throw ParseError(std::string("expected '=' after '") + c + "'", i + 1);
            out.push_back({Tok::op, c == '<' ? "<=" : ">=", i});
            i += 2;
        } else if (c == '"') {
            const std::size_t start = i++;
            std::string value;
            bool closed = false;
            while (i < s.size()) {
                if (s[i] == '\\' && i + 1 < s.size()) {
                    value.push_back(s[i + 1]);
                    i += 2;
                } else if (s[i] == '"') {
                    ++i;
                    closed = true;
                    break;
                } else {
                    value.push_back(s[i++]);
                }
            }
            if (!closed) throw ParseError("unterminated quoted string", start);
            out.push_back({Tok::quoted, std::move(value), start});
        } else {
            const std::size_t start = i;
            while (i < s.size() && !is_delim(s[i])) ++i;
            out.push_back({Tok::word, std::string(s.substr(start, i - start)), start});
        }
    }
    out.push_back({Tok::end, "", s.size()});
    return out;
}

bool parse_integer(std::string_view s, long long& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    BooleanQuery parse() {
        auto q = parse_or();
        if (peek().kind == Tok::rparen) throw ParseError("unbalanced ')'", peek().pos);
        if (peek().kind != Tok::end) throw ParseError("unexpected '" + peek().text + "'", peek().pos);
        return q;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_++]; }

    bool at_keyword(std::string_view kw) const {
        return peek().kind == Tok::word && peek().text == kw;
    }

    // Tokens that can begin an operand of an implicit AND.
    bool at_operand_start() const {
        const auto& t = peek();
        if (t.kind == Tok::lparen) return true;
        if (t.kind == Tok::word) return t.text != "AND" && t.text != "OR";
        return false;
    }

    BooleanQuery parse_or() {
        auto q = parse_and();
        while (at_keyword("OR")) {
            next();
            q = BooleanQuery::disj(std::move(q), parse_and());
        }
        return q;
    }

    BooleanQuery parse_and() {
        auto q = parse_unary();
        for (;;) {
            if (at_keyword("AND")) {
                next();
            } else if (!at_operand_start()) {
                break;
            }
            q = BooleanQuery::conj(std::move(q), parse_unary());
        }
        return q;
    }

    BooleanQuery parse_unary() {
        const auto& t = peek();
        if (t.kind == Tok::word && t.text == "NOT") {
            next();
            return BooleanQuery::negate(parse_unary());
        }
        if (t.kind == Tok::lparen) {
            const auto open = next().pos;
            auto q = parse_or();
            if (peek().kind != Tok::rparen) throw ParseError("unbalanced '(' opened", open);
            next();
            return q;
        }
        if (t.kind == Tok::word) {
            if (t.text == "AND" || t.text == "OR")
                throw ParseError("operator '" + t.text + "' missing left operand", t.pos);
            const auto word = next();
            if (peek().kind == Tok::op) return parse_attribute(word);
            auto norm = text::normalize_term(word.text);
            if (norm.empty()) throw ParseError("term '" + word.text + "' has no indexable characters", word.pos);
            return BooleanQuery::term(std::move(norm));
        }
        if (t.kind == Tok::rparen) throw ParseError("unbalanced ')'", t.pos);
        if (t.kind == Tok::end) throw ParseError("unexpected end of query", t.pos);
        throw ParseError("unexpected '" + t.text + "'", t.pos);
    }

    BooleanQuery parse_attribute(const Token& name) {
        const auto attr = corpus::parse_attribute(name.text);
        if (!attr) throw ParseError("unknown attribute '" + name.text + "'", name.pos);
        const auto op = next();
        const auto& v = peek();
        if (v.kind != Tok::word && v.kind != Tok::quoted)
            throw ParseError("expected a value after '" + op.text + "'", v.pos);
        next();

        if (*attr == Attribute::year) {
            long long n = 0;
            if (!parse_integer(v.text, n)) throw ParseError("year expects an integer", v.pos);
            const CmpOp cmp = op.text == ">=" ? CmpOp::ge : op.text == "<=" ? CmpOp::le : CmpOp::eq;
            return BooleanQuery::attr_cmp("year", cmp, n);
        }
        if (op.text != "=")
            throw ParseError("'" + op.text + "' applies only to year", op.pos);
        if (*attr == Attribute::venue_type && !parse_venue_type(text::fold_case(v.text)))
            throw ParseError("unknown venue_type '" + v.text + "'", v.pos);
        if (v.text.empty()) throw ParseError("empty value", v.pos);
        return BooleanQuery::attr_eq(name.text, v.text);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

BooleanQuery parse_query(std::string_view text) {
    if (std::all_of(text.begin(), text.end(), is_space))
        throw Error(ErrorCode::empty_query, "query is empty");
    auto q = Parser(lex(text)).parse();
    if (q.kind() == BooleanQuery::Kind::not_)
        throw ParseError("a pure negation selects the corpus complement; combine NOT with AND", 0);
    return q;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

int precedence(BooleanQuery::Kind k) {
    switch (k) {
    case BooleanQuery::Kind::or_: return 1;
    case BooleanQuery::Kind::and_: return 2;
    case BooleanQuery::Kind::not_: return 3;
    default: return 4;
    }
}

bool needs_quotes(std::string_view v) {
    if (v.empty() || v == "AND" || v == "OR" || v == "NOT") return true;
    return std::any_of(v.begin(), v.end(), [](char c) { return is_delim(c) || c == '\\'; });
}

std::string quote(std::string_view v) {
    if (!needs_quotes(v)) return std::string(v);
    std::string out = "\"";
    for (char c : v) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void render_into(const BooleanQuery& q, std::string& out);

void render_child(const BooleanQuery& child, int min_prec, std::string& out) {
    if (precedence(child.kind()) < min_prec) {
        out.push_back('(');
        render_into(child, out);
        out.push_back(')');
    } else {
        render_into(child, out);
    }
}

void render_into(const BooleanQuery& q, std::string& out) {
    using K = BooleanQuery::Kind;
    switch (q.kind()) {
    case K::term: out += q.text(); break;
    case K::attr_eq: out += q.attribute() + "=" + quote(q.value()); break;
    case K::attr_cmp:
        out += q.attribute();
        out += to_string(q.op());
        out += std::to_string(q.number());
        break;
    case K::and_:
    case K::or_: {
        const int p = precedence(q.kind());
        render_child(q.lhs(), p, out);
        out += q.kind() == K::and_ ? " AND " : " OR ";
        render_child(q.rhs(), p + 1, out);
        break;
    }
    case K::not_:
        out += "NOT ";
        render_child(q.operand(), precedence(K::not_), out);
        break;
    }
}

}  // namespace

std::string render(const BooleanQuery& q) {
    std::string out;
    render_into(q, out);
    return out;
}

std::string debug_string(const BooleanQuery& q) {
    using K = BooleanQuery::Kind;
    switch (q.kind()) {
    case K::term: return "Term(" + q.text() + ")";
    case K::attr_eq: return "AttrEq(" + q.attribute() + "," + q.value() + ")";
    case K::attr_cmp:
        return "AttrCmp(" + q.attribute() + "," + std::string(to_string(q.op())) + "," +
               std::to_string(q.number()) + ")";
    case K::and_: return "And(" + debug_string(q.lhs()) + "," + debug_string(q.rhs()) + ")";
    case K::or_: return "Or(" + debug_string(q.lhs()) + "," + debug_string(q.rhs()) + ")";
    case K::not_: return "Not(" + debug_string(q.operand()) + ")";
    }
    return {};
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

Attribute require_attribute(const std::string& name) {
    auto a = parse_attribute(name);
    if (!a) throw Error(ErrorCode::evaluation_error, "unknown attribute '" + name + "'", name);
    return *a;
}

long long year_value(const BooleanQuery& q) {
    if (q.kind() == BooleanQuery::Kind::attr_cmp) return q.number();
    long long n = 0;
    if (!parse_integer(q.value(), n))
        throw Error(ErrorCode::evaluation_error, "year expects an integer", "year");
    return n;
}

bool compare(long long lhs, CmpOp op, long long rhs) {
    switch (op) {
    case CmpOp::ge: return lhs >= rhs;
    case CmpOp::le: return lhs <= rhs;
    case CmpOp::eq: return lhs == rhs;
    }
    return false;
}

OrdinalSet eval_year(const CorpusIndex& index, CmpOp op, long long n) {
    OrdinalSet out;
    for (const auto& [year, ords] : index.year_index())
        if (compare(year, op, n)) out.insert(out.end(), ords.begin(), ords.end());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

OrdinalSet evaluate(const CorpusIndex& index, const BooleanQuery& q) {
    using K = BooleanQuery::Kind;
    switch (q.kind()) {
    case K::term: return index.postings(text::normalize_term(q.text()));
    case K::attr_eq: {
        const auto a = require_attribute(q.attribute());
        if (a == Attribute::year) return eval_year(index, CmpOp::eq, year_value(q));
        return index.attribute_postings(a, text::fold_case(q.value()));
    }
    case K::attr_cmp: {
        const auto a = require_attribute(q.attribute());
        if (a != Attribute::year)
            throw Error(ErrorCode::evaluation_error,
                        "comparison on non-numeric attribute '" + q.attribute() + "'", q.attribute());
        return eval_year(index, q.op(), q.number());
    }
    case K::and_:
    case K::or_: {
        const auto l = evaluate(index, q.lhs());
        const auto r = evaluate(index, q.rhs());
        OrdinalSet out;
        if (q.kind() == K::and_)
            std::set_intersection(l.begin(), l.end(), r.begin(), r.end(), std::back_inserter(out));
        else
            std::set_union(l.begin(), l.end(), r.begin(), r.end(), std::back_inserter(out));
        return out;
    }
    case K::not_: {
        const auto inner = evaluate(index, q.operand());
        OrdinalSet out;
        out.reserve(index.size() - inner.size());
        auto it = inner.begin();
        for (DocOrdinal o = 0; o < index.size(); ++o) {
            if (it != inner.end() && *it == o)
                ++it;
            else
                out.push_back(o);
        }
        return out;
    }
    }
    return {};
}

std::vector<std::string> evaluate_query(const CorpusIndex& index, const BooleanQuery& q) {
    std::vector<std::string> ids;
    for (auto o : evaluate(index, q)) ids.push_back(index.at(o).doc_id);
    return ids;
}

bool matches(const Document& doc, const BooleanQuery& q) {
    using K = BooleanQuery::Kind;
    switch (q.kind()) {
    case K::term: {
        const auto terms = document_terms(doc);
        return std::binary_search(terms.begin(), terms.end(), text::normalize_term(q.text()));
    }
    case K::attr_eq: {
        const auto a = require_attribute(q.attribute());
        if (a == Attribute::year) return doc.year == year_value(q);
        const auto vals = attribute_values(doc, a);
        return std::binary_search(vals.begin(), vals.end(), text::fold_case(q.value()));
    }
    case K::attr_cmp:
        if (require_attribute(q.attribute()) != Attribute::year)
            throw Error(ErrorCode::evaluation_error,
                        "comparison on non-numeric attribute '" + q.attribute() + "'", q.attribute());
        return compare(doc.year, q.op(), q.number());
    case K::and_: return matches(doc, q.lhs()) && matches(doc, q.rhs());
    case K::or_: return matches(doc, q.lhs()) || matches(doc, q.rhs());
    case K::not_: return !matches(doc, q.operand());
    }
    return false;
}

}  // namespace eis::corpus
