#include <algorithm>
#include <sstream>

#include "bcsec/rate_algebra.hpp"

namespace bcsec {

std::string rational_to_string(const Rational& r) {
    std::ostringstream ss;
    ss << numerator(r);
    if (denominator(r) != 1) ss << '/' << denominator(r);
    return ss.str();
}

InfoTerm InfoTerm::make(VarSet a, VarSet b, VarSet c) {
    if (a.empty() || b.empty()) throw SystemError("info term needs nonempty A and B");
    if (!a.disjoint(b) || !a.disjoint(c) || !b.disjoint(c))
        throw SystemError("info term I(" + a.to_string() + ";" + b.to_string() + "|" +
                          c.to_string() + ") has overlapping sets");
    if (b < a) std::swap(a, b);
    return InfoTerm{a, b, c};
}

std::string InfoTerm::to_string() const {
    std::string s = "I(" + a.to_string() + ";" + b.to_string();
    if (!c.empty()) s += "|" + c.to_string();
    return s + ")";
}

InfoTerm InfoTerm::parse(std::string_view text) {
    if (text.size() < 5 || text.substr(0, 2) != "I(" || text.back() != ')')
        throw SystemError("cannot parse info term '" + std::string(text) + "'");
    auto body = text.substr(2, text.size() - 3);
    const auto semi = body.find(';');
    if (semi == std::string_view::npos) throw SystemError("info term missing ';'");
    const auto bar = body.find('|', semi);
    const auto a = body.substr(0, semi);
    const auto b = body.substr(semi + 1, bar == std::string_view::npos ? std::string_view::npos
                                                                       : bar - semi - 1);
    const auto c = bar == std::string_view::npos ? std::string_view{} : body.substr(bar + 1);
    return make(VarSet::parse(a), VarSet::parse(b), VarSet::parse(c));
}

namespace {

template <class Map, class Key>
void accumulate(Map& m, const Key& key, const Rational& coef) {
    if (coef == 0) return;
    auto [it, inserted] = m.try_emplace(key, coef);
    if (!inserted) {
        it->second += coef;
        if (it->second == 0) m.erase(it);
    }
}

}  // namespace

LinearExpr& LinearExpr::add_rate(const std::string& var, const Rational& coef) {
    accumulate(rates, var, coef);
    return *this;
}

LinearExpr& LinearExpr::add_info(const InfoTerm& term, const Rational& coef) {
    accumulate(infos, term, coef);
    return *this;
}

LinearExpr& LinearExpr::add_constant(const Rational& c) {
    constant += c;
    return *this;
}

LinearExpr& LinearExpr::operator+=(const LinearExpr& other) {
    for (const auto& [k, v] : other.rates) add_rate(k, v);
    for (const auto& [k, v] : other.infos) add_info(k, v);
    constant += other.constant;
    return *this;
}

LinearExpr& LinearExpr::operator-=(const LinearExpr& other) {
    for (const auto& [k, v] : other.rates) add_rate(k, -v);
    for (const auto& [k, v] : other.infos) add_info(k, -v);
    constant -= other.constant;
    return *this;
}

LinearExpr LinearExpr::operator-() const { return scaled(-1); }

LinearExpr LinearExpr::scaled(const Rational& s) const {
    LinearExpr out;
    if (s == 0) return out;
    for (const auto& [k, v] : rates) out.rates.emplace(k, Rational(v * s));
    for (const auto& [k, v] : infos) out.infos.emplace(k, Rational(v * s));
    out.constant = constant * s;
    return out;
}

Rational LinearExpr::rate(const std::string& var) const {
    auto it = rates.find(var);
    return it == rates.end() ? Rational(0) : it->second;
}

std::string LinearExpr::to_string() const {
    std::ostringstream ss;
    bool first = true;
    const auto term = [&](const Rational& coef, const std::string& name) {
        const bool neg = coef < 0;
        const Rational mag = neg ? Rational(-coef) : coef;
        if (first) {
            if (neg) ss << '-';
        } else {
            ss << (neg ? " - " : " + ");
        }
        if (name.empty()) {
            ss << rational_to_string(mag);
        } else {
            if (mag != 1) ss << rational_to_string(mag) << '*';
            ss << name;
        }
        first = false;
    };
    for (const auto& [k, v] : rates) term(v, k);
    for (const auto& [k, v] : infos) term(v, k.to_string());
    if (constant != 0 || first) term(constant, "");
    return ss.str();
}

LinearExpr rate(const std::string& var, const Rational& coef) {
    LinearExpr e;
    e.add_rate(var, coef);
    return e;
}

LinearExpr info(VarSet a, VarSet b, VarSet c, const Rational& coef) {
    LinearExpr e;
    e.add_info(InfoTerm::make(a, b, c), coef);
    return e;
}

LinearExpr operator+(LinearExpr lhs, const LinearExpr& rhs) { return lhs += rhs; }
LinearExpr operator-(LinearExpr lhs, const LinearExpr& rhs) { return lhs -= rhs; }

std::string_view relation_symbol(Relation r) {
    switch (r) {
        case Relation::lt: return "<";
        case Relation::le: return "<=";
        case Relation::eq: return "=";
        case Relation::ge: return ">=";
        case Relation::gt: return ">";
    }
    return "?";
}

Relation parse_relation(std::string_view s) {
    if (s == "<") return Relation::lt;
    if (s == "<=" || s == "≤") return Relation::le;
    if (s == "=" || s == "==") return Relation::eq;
    if (s == ">=" || s == "≥") return Relation::ge;
    if (s == ">") return Relation::gt;
    throw SystemError("unknown relation '" + std::string(s) + "'");
}

bool is_strict(Relation r) { return r == Relation::lt || r == Relation::gt; }

LinearExpr Constraint::oriented() const {
    return (relation == Relation::ge || relation == Relation::gt) ? -expr : expr;
}

std::string Constraint::to_string() const {
    std::string s = expr.to_string() + " " + std::string(relation_symbol(relation)) + " 0";
    if (!label.empty()) s += "   [" + label + "]";
    return s;
}

Constraint make_constraint(const LinearExpr& lhs, Relation rel, const LinearExpr& rhs,
                           std::string label) {
    return Constraint{lhs - rhs, rel, std::move(label), {}};
}

std::size_t ConstraintSystem::count(Relation r) const {
    std::size_t n = 0;
    for (const auto& c : constraints) n += c.relation == r;
    return n;
}

std::vector<const Constraint*> ConstraintSystem::gates() const {
    std::vector<const Constraint*> out;
    for (const auto& c : constraints)
        if (c.is_gate()) out.push_back(&c);
    return out;
}

void ConstraintSystem::validate() const {
    for (const auto& c : constraints)
        for (const auto& [var, coef] : c.expr.rates) {
            const bool declared =
                std::find(free_vars.begin(), free_vars.end(), var) != free_vars.end() ||
                std::find(bound_vars.begin(), bound_vars.end(), var) != bound_vars.end();
            if (!declared)
                throw SystemError("constraint '" + c.label + "' uses undeclared variable " + var);
        }
    for (const auto& v : free_vars)
        if (std::find(bound_vars.begin(), bound_vars.end(), v) != bound_vars.end())
            throw SystemError("variable " + v + " declared both free and bound");
}

}  // namespace bcsec
