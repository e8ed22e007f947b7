#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cbf/constraints.hpp"
#include "cbf/error.hpp"

namespace cbf {

// ---------------------------------------------------------------------------
// Parameter names

ParameterTable::ParameterTable(int J, int L, int P, std::vector<std::string> group_labels,
                               std::vector<std::string> covariate_names, std::vector<std::string> outcome_names)
    : J_(J), L_(L), P_(P) {
    if (J < 1 || L < 0 || P < 1) fail(Errc::DimensionMismatch, "parameter table needs J >= 1, L >= 0, P >= 1");
    const int K = J + L;
    canonical_.resize(std::size_t(K * P));
    auto idx = [&](int row, int p) { return p * K + row; };
    auto s = [](int v) { return std::to_string(v); };
    // canonical names first so that they win every clash
    for (int p = 0; p < P; ++p) {
        for (int j = 0; j < J; ++j) {
            const std::string name = P == 1 ? "mu" + s(j + 1) : "mu" + s(j + 1) + "_" + s(p + 1);
            canonical_[std::size_t(idx(j, p))] = name;
            add(name, idx(j, p), true);
        }
        for (int l = 0; l < L; ++l) {
            const std::string name = P == 1 ? "b" + s(l + 1) : "b" + s(l + 1) + "_" + s(p + 1);
            canonical_[std::size_t(idx(J + l, p)) ] = name;
            add(name, idx(J + l, p), true);
        }
    }
    for (int p = 0; p < P; ++p) {
        for (int j = 0; j < J; ++j) {
            add("mu" + s(j + 1) + "_" + s(p + 1), idx(j, p), false);
            add("mu" + s(j + 1) + s(p + 1), idx(j, p), false);
        }
        for (int l = 0; l < L; ++l) {
            add("b" + s(l + 1) + "_" + s(p + 1), idx(J + l, p), false);
            add("b" + s(l + 1) + s(p + 1), idx(J + l, p), false);
        }
    }
    auto outcome = [&](int p) { return p < int(outcome_names.size()) ? outcome_names[std::size_t(p)] : s(p + 1); };
    for (int j = 0; j < J && j < int(group_labels.size()); ++j) {
        for (int p = 0; p < P; ++p) add(group_labels[std::size_t(j)] + "." + outcome(p), idx(j, p), false);
        if (P == 1) add(group_labels[std::size_t(j)], idx(j, 0), false);
    }
    for (int l = 0; l < L && l < int(covariate_names.size()); ++l) {
        for (int p = 0; p < P; ++p) add(covariate_names[std::size_t(l)] + "." + outcome(p), idx(J + l, p), false);
        if (P == 1) add(covariate_names[std::size_t(l)], idx(J + l, 0), false);
    }
}

void ParameterTable::add(const std::string& name, int flat, bool primary) {
    auto it = names_.find(name);
    if (it == names_.end()) {
        names_.emplace(name, flat);
        primary_[name] = primary;
        return;
    }
    if (it->second == flat) return;
    // a compact alias never overrides a canonical name; anything else is ambiguous
    if (primary_[name] && !primary) return;
    it->second = -1;
}

ParamIndex ParameterTable::lookup(std::string_view name) const {
    auto it = names_.find(std::string(name));
    if (it == names_.end()) fail(Errc::UnknownParameter, "unknown parameter '" + std::string(name) + "'");
    if (it->second < 0) fail(Errc::UnknownParameter, "ambiguous parameter name '" + std::string(name) + "'");
    ParamIndex pi;
    pi.flat = it->second;
    pi.outcome = pi.flat / K();
    pi.row = pi.flat % K();
    pi.kind = pi.row < J_ ? ParamIndex::Kind::Mean : ParamIndex::Kind::Coefficient;
    return pi;
}

// ---------------------------------------------------------------------------
// Lexer and recursive-descent parser

namespace {

constexpr double kZero = 1e-12;

struct Token {
    enum Kind { Number, Ident, Op, End } kind = End;
    std::string text;
    double value = 0.0;
    std::size_t pos = 0;
};

[[noreturn]] void syntax(std::size_t pos, const std::string& msg) {
    fail(Errc::SyntaxError, msg + " at column " + std::to_string(pos + 1));
}

std::vector<Token> lex(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    auto ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
    auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; };
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (static_cast<unsigned char>(c) >= 0x80) syntax(i, "non-ASCII character");
        Token t;
        t.pos = i;
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + s.size(), v);
            if (ec != std::errc()) syntax(i, "malformed number");
            const std::size_t len = std::size_t(ptr - (s.data() + i));
            t.kind = Token::Number;
            t.value = v;
            t.text = std::string(s.substr(i, len));
            i += len;
        } else if (ident_start(c)) {
            std::size_t j = i;
            while (j < s.size() && ident_char(s[j])) ++j;
            t.kind = Token::Ident;
            t.text = std::string(s.substr(i, j - i));
            i = j;
        } else {
            if (i + 1 < s.size()) {
                const std::string two(s.substr(i, 2));
                if (two == ">=" || two == "<=") syntax(i, "'" + two + "' is not supported; use strict '>' or '<' with '=' rows");
                if (two == "==" || two == "!=") syntax(i, "'" + two + "' is not supported; use '='");
            }
            if (std::string_view("=<>&+-*/(),").find(c) == std::string_view::npos) {
                syntax(i, std::string("unexpected character '") + c + "'");
            }
            t.kind = Token::Op;
            t.text = std::string(1, c);
            ++i;
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.pos = s.size();
    out.push_back(end);
    return out;
}

struct LinExpr {
    Vector coef;
    double constant = 0.0;

    bool is_constant() const { return coef.cwiseAbs().maxCoeff() == 0.0; }
};

struct RawRow {
    Vector coef;
    double rhs;
};

class Parser {
public:
    Parser(std::vector<Token> toks, const ParameterTable& names) : t_(std::move(toks)), names_(names) {}

    void hypothesis(std::vector<RawRow>& eq, std::vector<RawRow>& ord) {
        relation(eq, ord);
        while (is_op("&")) {
            ++i_;
            relation(eq, ord);
        }
        if (peek().kind != Token::End) syntax(peek().pos, "unexpected '" + peek().text + "'");
    }

private:
    const Token& peek() const { return t_[i_]; }
    bool is_op(const char* op) const { return peek().kind == Token::Op && peek().text == op; }
    void expect(const char* op) {
        if (!is_op(op)) syntax(peek().pos, std::string("expected '") + op + "'");
        ++i_;
    }

    LinExpr zero() const { return {Vector::Zero(names_.size()), 0.0}; }

    void relation(std::vector<RawRow>& eq, std::vector<RawRow>& ord) {
        std::vector<LinExpr> left = operand();
        if (!(is_op("=") || is_op(">") || is_op("<"))) syntax(peek().pos, "expected '=', '>' or '<'");
        while (is_op("=") || is_op(">") || is_op("<")) {
            const char rel = peek().text[0];
            ++i_;
            std::vector<LinExpr> right = operand();
            for (const auto& l : left) {
                for (const auto& r : right) {
                    // (l - r) . theta  rel  r.const - l.const
                    RawRow row{l.coef - r.coef, r.constant - l.constant};
                    if (rel == '=') {
                        eq.push_back(row);
                    } else if (rel == '>') {
                        ord.push_back(row);
                    } else {
                        ord.push_back({-row.coef, -row.rhs});
                    }
                }
            }
            left = std::move(right);
        }
    }

    std::vector<LinExpr> operand() {
        if (is_op("(") && tuple_ahead()) {
            ++i_;
            std::vector<LinExpr> items{expr()};
            while (is_op(",")) {
                ++i_;
                items.push_back(expr());
            }
            expect(")");
            return items;
        }
        return {expr()};
    }

    // true when the parenthesis at the cursor holds a top-level comma
    bool tuple_ahead() const {
        int depth = 0;
        for (std::size_t j = i_; j < t_.size(); ++j) {
            if (t_[j].kind != Token::Op) continue;
            if (t_[j].text == "(") ++depth;
            if (t_[j].text == ")" && --depth == 0) return false;
            if (t_[j].text == "," && depth == 1) return true;
        }
        return false;
    }

    LinExpr expr() {
        LinExpr acc = zero();
        bool first = true;
        while (true) {
            double sign = 1.0;
            if (is_op("+") || is_op("-")) {
                sign = is_op("-") ? -1.0 : 1.0;
                ++i_;
            } else if (!first) {
                break;
            }
            LinExpr t = term();
            acc.coef += sign * t.coef;
            acc.constant += sign * t.constant;
            first = false;
        }
        return acc;
    }

    LinExpr term() {
        LinExpr acc = factor();
        while (true) {
            if (is_op("*") || is_op("/")) {
                const bool div = is_op("/");
                const std::size_t pos = peek().pos;
                ++i_;
                LinExpr rhs = factor();
                acc = div ? divide(acc, rhs, pos) : multiply(acc, rhs, pos);
            } else if (peek().kind == Token::Ident || (is_op("(") && !tuple_ahead())) {
                // implicit product such as "2mu1" or "0.5(mu1 + mu2)"
                if (!acc.is_constant()) syntax(peek().pos, "missing operator");
                const std::size_t pos = peek().pos;
                acc = multiply(acc, factor(), pos);
            } else {
                break;
            }
        }
        return acc;
    }

    LinExpr factor() {
        const Token& tok = peek();
        if (tok.kind == Token::Number) {
            ++i_;
            LinExpr e = zero();
            e.constant = tok.value;
            return e;
        }
        if (tok.kind == Token::Ident) {
            ++i_;
            LinExpr e = zero();
            e.coef[names_.lookup(tok.text).flat] = 1.0;
            return e;
        }
        if (is_op("(")) {
            ++i_;
            LinExpr e = expr();
            expect(")");
            return e;
        }
        if (is_op("-")) {
            ++i_;
            LinExpr e = factor();
            e.coef = -e.coef;
            e.constant = -e.constant;
            return e;
        }
        if (tok.kind == Token::End) syntax(tok.pos, "unexpected end of hypothesis");
        syntax(tok.pos, "unexpected '" + tok.text + "'");
    }

    static LinExpr multiply(const LinExpr& a, const LinExpr& b, std::size_t pos) {
        if (!a.is_constant() && !b.is_constant()) syntax(pos, "product of two parameters is not linear");
        if (a.is_constant()) return {a.constant * b.coef, a.constant * b.constant};
        return {b.constant * a.coef, b.constant * a.constant};
    }

    static LinExpr divide(const LinExpr& a, const LinExpr& b, std::size_t pos) {
        if (!b.is_constant()) syntax(pos, "division by a parameter is not linear");
        if (b.constant == 0.0) syntax(pos, "division by zero");
        return {a.coef / b.constant, a.constant / b.constant};
    }

    std::vector<Token> t_;
    const ParameterTable& names_;
    std::size_t i_ = 0;
};

bool same_row(const Vector& a, double ra, const Vector& b, double rb) {
    const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
    return (a - b).cwiseAbs().maxCoeff() <= 1e-12 * scale && std::abs(ra - rb) <= 1e-12 * std::max({1.0, std::abs(ra), std::abs(rb)});
}

int first_nonzero(const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > kZero) return int(i);
    }
    return -1;
}

Matrix stack_rows(const std::vector<RawRow>& rows, int pk, Vector& rhs) {
    Matrix m(Eigen::Index(rows.size()), pk);
    rhs.resize(Eigen::Index(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        m.row(Eigen::Index(i)) = rows[i].coef.transpose();
        rhs[Eigen::Index(i)] = rows[i].rhs;
    }
    return m;
}

std::string describe(const Vector& coef, double rhs, const char* rel, const ParameterTable& names) {
    std::ostringstream os;
    bool first = true;
    char buf[64];
    for (Eigen::Index i = 0; i < coef.size(); ++i) {
        const double c = coef[i];
        if (c == 0.0) continue;
        const double a = std::abs(c);
        if (first) {
            if (c < 0) os << "-";
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        if (a != 1.0) {
            std::snprintf(buf, sizeof buf, "%.17g", a);
            os << buf << "*";
        }
        os << names.canonical_name(int(i));
        first = false;
    }
    if (first) os << "0";
    std::snprintf(buf, sizeof buf, "%.17g", rhs == 0.0 ? 0.0 : rhs);
    os << " " << rel << " " << buf;
    return os.str();
}

void canonicalize(ConstrainedModel& m, std::vector<RawRow> eq, std::vector<RawRow> ord, const ParameterTable& names) {
    const int pk = names.size();
    // equalities: drop trivial and dependent rows, reject contradictions
    std::vector<RawRow> kept;
    for (auto& row : eq) {
        const int lead = first_nonzero(row.coef);
        if (lead < 0) {
            if (std::abs(row.rhs) > kZero) {
                fail(Errc::InconsistentConstraints, "equality reduces to 0 = " + std::to_string(row.rhs));
            }
            m.warnings.push_back("dropped trivial equality 0 = 0");
            continue;
        }
        const double scale = row.coef[lead];
        row.coef /= scale;
        row.rhs /= scale;
        for (Eigen::Index i = 0; i < row.coef.size(); ++i) {
            if (std::abs(row.coef[i]) <= kZero) row.coef[i] = 0.0;
        }
        if (!kept.empty()) {
            Vector rhs;
            Matrix a = stack_rows(kept, pk, rhs);
            Matrix with(a.rows() + 1, pk);
            with << a, row.coef.transpose();
            if (row_rank(with) == a.rows()) {
                Matrix aug(a.rows() + 1, pk + 1);
                aug << a, rhs, row.coef.transpose(), row.rhs;
                if (row_rank(aug) > a.rows()) {
                    fail(Errc::InconsistentConstraints,
                         "equality '" + describe(row.coef, row.rhs, "=", names) + "' contradicts the other equalities");
                }
                m.warnings.push_back("dropped redundant equality '" + describe(row.coef, row.rhs, "=", names) + "'");
                continue;
            }
        }
        kept.push_back(std::move(row));
    }
    // substitute unit equalities (theta_k = c) into the order rows
    for (const auto& e : kept) {
        const int lead = first_nonzero(e.coef);
        if ((e.coef.array() != 0.0).count() != 1) continue;
        for (auto& o : ord) {
            const double c = o.coef[lead];
            if (c == 0.0) continue;
            o.rhs -= c * e.rhs;
            o.coef[lead] = 0.0;
        }
    }
    std::vector<RawRow> orders;
    for (auto& row : ord) {
        const int lead = first_nonzero(row.coef);
        if (lead < 0) {
            if (0.0 > row.rhs + kZero) {
                m.warnings.push_back("dropped order constraint that always holds");
                continue;
            }
            fail(Errc::InconsistentConstraints, "order constraint reduces to 0 > " + std::to_string(row.rhs));
        }
        const double scale = std::abs(row.coef[lead]);
        row.coef /= scale;
        row.rhs /= scale;
        for (Eigen::Index i = 0; i < row.coef.size(); ++i) {
            if (std::abs(row.coef[i]) <= kZero) row.coef[i] = 0.0;
        }
        const bool dup = std::any_of(orders.begin(), orders.end(),
                                     [&](const RawRow& o) { return same_row(o.coef, o.rhs, row.coef, row.rhs); });
        if (dup) {
            m.warnings.push_back("dropped duplicate order constraint '" + describe(row.coef, row.rhs, ">", names) + "'");
            continue;
        }
        orders.push_back(std::move(row));
    }
    m.re = stack_rows(kept, pk, m.rhs_e);
    m.ro = stack_rows(orders, pk, m.rhs_o);
}

bool is_model_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
}

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

bool parse_complement(std::string_view text, ConstrainedModel& m) {
    const std::string s = trim(text);
    const std::string kw = "complement";
    if (s.compare(0, kw.size(), kw) != 0) return false;
    std::string rest = trim(std::string_view(s).substr(kw.size()));
    if (!rest.empty() && rest[0] != '(') return false;  // an identifier that starts with "complement"
    m.is_complement = true;
    if (rest.empty()) return true;
    if (rest.back() != ')') syntax(s.size(), "expected ')' after complement members");
    std::string inner = rest.substr(1, rest.size() - 2);
    std::size_t start = 0;
    while (start <= inner.size()) {
        const std::size_t comma = inner.find(',', start);
        const std::string name = trim(std::string_view(inner).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (name.empty() || !std::all_of(name.begin(), name.end(), is_model_name_char)) {
            syntax(kw.size() + 1 + start, "bad model name in complement list");
        }
        m.complement_of.push_back(name);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return true;
}

} // namespace

ConstrainedModel parse(std::string_view hypothesis, const ParameterTable& names, std::string model_name) {
    ConstrainedModel m;
    m.name = std::move(model_name);
    m.source = std::string(hypothesis);
    const int pk = names.size();
    m.re = Matrix(0, pk);
    m.ro = Matrix(0, pk);
    m.rhs_e = Vector(0);
    m.rhs_o = Vector(0);
    if (trim(hypothesis) == "unconstrained") return m;
    if (parse_complement(hypothesis, m)) return m;
    if (trim(hypothesis).empty()) syntax(0, "empty hypothesis");

    std::vector<RawRow> eq, ord;
    Parser(lex(hypothesis), names).hypothesis(eq, ord);
    canonicalize(m, std::move(eq), std::move(ord), names);

    if (m.orders() > 0 && order_slack(m.re, m.rhs_e, m.ro, m.rhs_o) <= 1e-9) {
        fail(Errc::InconsistentConstraints, "order constraints of '" + m.source + "' admit no parameter value");
    }
    boundary_point(m, pk);
    return m;
}

std::string pretty_print(const ConstrainedModel& m, const ParameterTable& names) {
    if (m.is_complement) {
        if (m.complement_of.empty()) return "complement";
        std::string s = "complement(";
        for (std::size_t i = 0; i < m.complement_of.size(); ++i) s += (i ? ", " : "") + m.complement_of[i];
        return s + ")";
    }
    if (m.unconstrained()) return "unconstrained";
    std::vector<std::string> parts;
    for (Eigen::Index i = 0; i < m.re.rows(); ++i) parts.push_back(describe(m.re.row(i).transpose(), m.rhs_e[i], "=", names));
    for (Eigen::Index i = 0; i < m.ro.rows(); ++i) parts.push_back(describe(m.ro.row(i).transpose(), m.rhs_o[i], ">", names));
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? " & " : "") + parts[i];
    return s;
}

} // namespace cbf
