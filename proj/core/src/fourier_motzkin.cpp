#include <algorithm>
#include <map>

#include "bcsec/rate_algebra.hpp"

namespace bcsec {

namespace {

using Certificate = std::map<std::size_t, Rational>;

struct Row {
    LinearExpr expr;  // oriented: expr <= 0, expr < 0 or expr = 0
    bool strict = false;
    bool equality = false;
    Certificate cert;
    std::string label;
};

void add_scaled(Certificate& into, const Certificate& from, const Rational& s) {
    for (const auto& [k, v] : from) {
        auto [it, inserted] = into.try_emplace(k, Rational(v * s));
        if (!inserted) {
            it->second += v * s;
            if (it->second == 0) into.erase(it);
        }
    }
}

Row scaled(const Row& r, const Rational& s) {
    Row out{r.expr.scaled(s), r.strict, r.equality, {}, r.label};
    add_scaled(out.cert, r.cert, s);
    return out;
}

// r + s*q
Row combine(const Row& r, const Row& q, const Rational& s) {
    Row out = r;
    out.expr += q.expr.scaled(s);
    add_scaled(out.cert, q.cert, s);
    return out;
}

Rational abs_r(const Rational& r) { return r < 0 ? Rational(-r) : r; }

void normalize(Row& r) {
    Rational lead = 0;
    if (!r.expr.rates.empty()) {
        lead = r.expr.rates.begin()->second;
    } else if (!r.expr.infos.empty()) {
        lead = r.expr.infos.begin()->second;
    } else if (r.expr.constant != 0) {
        lead = r.expr.constant;
    }
    if (lead == 0) return;
    const Rational s = 1 / abs_r(lead);
    if (s != 1) r = scaled(r, s);
}

bool trivially_true(const Row& r) {
    if (!r.expr.is_constant()) return false;
    return r.strict ? r.expr.constant < 0 : r.expr.constant <= 0;
}

// Dedup by (rates, infos); the larger constant is the tighter row.
class RowSet {
public:
    void insert(Row r) {
        normalize(r);
        if (trivially_true(r)) return;
        Key key{r.expr.rates, r.expr.infos};
        auto it = index_.find(key);
        if (it == index_.end()) {
            index_.emplace(std::move(key), rows_.size());
            rows_.push_back(std::move(r));
            return;
        }
        Row& old = rows_[it->second];
        if (r.expr.constant > old.expr.constant ||
            (r.expr.constant == old.expr.constant && r.strict && !old.strict))
            old = std::move(r);
    }
    std::vector<Row> take() { return std::move(rows_); }
    std::size_t size() const { return rows_.size(); }

private:
    using Key = std::pair<std::map<std::string, Rational>, std::map<InfoTerm, Rational>>;
    std::map<Key, std::size_t> index_;
    std::vector<Row> rows_;
};

std::vector<Row> initial_rows(const ConstraintSystem& system) {
    std::vector<Row> rows;
    for (std::size_t i = 0; i < system.constraints.size(); ++i) {
        const auto& c = system.constraints[i];
        rows.push_back(Row{c.oriented(), is_strict(c.relation), c.relation == Relation::eq,
                           Certificate{{i, Rational(1)}}, c.label});
    }
    return rows;
}

std::size_t occurrences(const std::vector<Row>& rows, const std::string& var) {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.expr.rates.count(var);
    return n;
}

// Solves each equality for one of `allowed`; returns the substituted variables.
std::vector<std::string> fold_equalities(std::vector<Row>& rows,
                                         const std::vector<std::string>& allowed) {
    std::vector<std::string> solved;
    while (true) {
        auto eq = std::find_if(rows.begin(), rows.end(), [](const Row& r) { return r.equality; });
        if (eq == rows.end()) break;
        Row q = std::move(*eq);
        rows.erase(eq);
        if (q.expr.is_constant()) {
            if (q.expr.constant != 0) throw SystemError("inconsistent equality '" + q.label + "'");
            continue;
        }
        std::string pick;
        std::size_t best = SIZE_MAX;
        for (const auto& v : allowed) {
            if (q.expr.rate(v) == 0) continue;
            const std::size_t occ = occurrences(rows, v);
            if (occ < best) {
                best = occ;
                pick = v;
            }
        }
        if (pick.empty())
            throw SystemError("equality '" + q.label + "' has no bound variable to solve for");
        const Rational a = q.expr.rate(pick);
        for (auto& r : rows) {
            const Rational b = r.expr.rate(pick);
            if (b != 0) r = combine(r, q, -b / a);
        }
        solved.push_back(pick);
    }
    return solved;
}

ConstraintSystem to_system(const ConstraintSystem& input, std::vector<Row> rows,
                           const std::vector<std::string>& eliminated, std::string name) {
    ConstraintSystem out;
    out.name = std::move(name);
    out.free_vars = input.free_vars;
    for (const auto& v : input.bound_vars)
        if (std::find(eliminated.begin(), eliminated.end(), v) == eliminated.end())
            out.bound_vars.push_back(v);
    out.collapse = input.collapse;
    out.basis = input.constraints;
    out.notes = input.notes;
    std::size_t k = 0;
    for (auto& r : rows) {
        Constraint c;
        c.expr = std::move(r.expr);
        c.relation = r.strict ? Relation::lt : Relation::le;
        c.label = r.cert.size() == 1 ? r.label : "derived " + std::to_string(++k);
        c.certificate = std::move(r.cert);
        out.constraints.push_back(std::move(c));
    }
    return out;
}

}  // namespace

ConstraintSystem substitute_equalities(const ConstraintSystem& system) {
    system.validate();
    auto rows = initial_rows(system);
    const auto solved = fold_equalities(rows, system.bound_vars);
    RowSet set;
    for (auto& r : rows) set.insert(std::move(r));
    return to_system(system, set.take(), solved, system.name);
}

ConstraintSystem fm_eliminate(const ConstraintSystem& system, const std::vector<std::string>& order,
                              FmOptions options) {
    system.validate();
    for (const auto& v : order)
        if (std::find(system.bound_vars.begin(), system.bound_vars.end(), v) ==
            system.bound_vars.end())
            throw SystemError("cannot eliminate " + v + ": not a bound variable");

    auto rows = initial_rows(system);
    const auto solved = fold_equalities(rows, order);
    {
        RowSet set;
        for (auto& r : rows) set.insert(std::move(r));
        rows = set.take();
    }

    for (const auto& x : order) {
        if (std::find(solved.begin(), solved.end(), x) != solved.end()) continue;
        std::vector<const Row*> pos, neg;
        RowSet next;
        for (const auto& r : rows) {
            const Rational a = r.expr.rate(x);
            if (a > 0) {
                pos.push_back(&r);
            } else if (a < 0) {
                neg.push_back(&r);
            } else {
                next.insert(r);
            }
        }
        for (const Row* p : pos)
            for (const Row* n : neg) {
                const Rational a = p->expr.rate(x);
                const Rational b = -n->expr.rate(x);
                Row c = scaled(*p, b);
                c = combine(c, *n, a);
                c.strict = p->strict || n->strict;
                c.label.clear();
                next.insert(std::move(c));
                if (next.size() > options.cap)
                    throw FmCapExceeded("Fourier-Motzkin cap of " + std::to_string(options.cap) +
                                        " constraints exceeded while eliminating " + x + " (" +
                                        std::to_string(pos.size()) + " upper x " +
                                        std::to_string(neg.size()) + " lower bounds)");
            }
        rows = next.take();
    }
    return to_system(system, std::move(rows), order, "FM(" + system.name + ")");
}

ConstraintSystem fm_eliminate(const ConstraintSystem& system, FmOptions options) {
    std::vector<std::string> order;
    for (const auto& v : default_elimination_order())
        if (std::find(system.bound_vars.begin(), system.bound_vars.end(), v) !=
            system.bound_vars.end())
            order.push_back(v);
    for (const auto& v : system.bound_vars)
        if (std::find(order.begin(), order.end(), v) == order.end()) order.push_back(v);
    return fm_eliminate(system, order, options);
}

bool verify_certificate(const ConstraintSystem& system, std::size_t index) {
    const auto& c = system.constraints.at(index);
    if (c.certificate.empty()) return false;
    LinearExpr sum;
    bool strict = false;
    for (const auto& [j, lambda] : c.certificate) {
        if (j >= system.basis.size()) return false;
        const auto& b = system.basis[j];
        if (b.relation != Relation::eq && lambda < 0) return false;
        if (is_strict(b.relation) && lambda > 0) strict = true;
        sum += b.oriented().scaled(lambda);
    }
    return sum == c.oriented() && strict == is_strict(c.relation);
}

ConstraintSystem relaxed(const ConstraintSystem& system) {
    ConstraintSystem out = system;
    for (auto& c : out.constraints) {
        if (c.relation == Relation::lt) c.relation = Relation::le;
        if (c.relation == Relation::gt) c.relation = Relation::ge;
    }
    return out;
}

}  // namespace bcsec
