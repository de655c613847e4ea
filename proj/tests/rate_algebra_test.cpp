#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "bcsec/geometry.hpp"
#include "bcsec/rate_algebra.hpp"
#include "bcsec/sampling.hpp"
#include "bcsec/system_io.hpp"
#include "test_joints.hpp"

using namespace bcsec;

namespace {

using V = Var;

ConstraintSystem custom(std::vector<std::string> free, std::vector<std::string> bound,
                        std::vector<Constraint> rows) {
    ConstraintSystem s;
    s.name = "custom";
    s.free_vars = std::move(free);
    s.bound_vars = std::move(bound);
    s.constraints = std::move(rows);
    s.validate();
    return s;
}

LinearExpr num(const Rational& c) {
    LinearExpr e;
    e.add_constant(c);
    return e;
}

// True if a = k*b for some k > 0.
bool positively_proportional(const LinearExpr& a, const LinearExpr& b) {
    std::optional<Rational> k;
    const auto match = [&](const Rational& x, const Rational& y) {
        if (x == 0 && y == 0) return true;
        if (x == 0 || y == 0) return false;
        const Rational r = x / y;
        if (r <= 0) return false;
        if (!k) k = r;
        return *k == r;
    };
    std::set<std::string> vars;
    for (const auto& [v, c] : a.rates) vars.insert(v);
    for (const auto& [v, c] : b.rates) vars.insert(v);
    for (const auto& v : vars)
        if (!match(a.rate(v), b.rate(v))) return false;
    if (a.infos != b.infos && !(a.infos.empty() && b.infos.empty())) return false;
    return match(a.constant, b.constant);
}

bool contains_row(const ConstraintSystem& s, const LinearExpr& oriented) {
    return std::any_of(s.constraints.begin(), s.constraints.end(), [&](const Constraint& c) {
        return positively_proportional(c.oriented(), oriented);
    });
}

double eval(const LinearExpr& e, const std::map<std::string, double>& at) {
    double v = e.constant.convert_to<double>();
    for (const auto& [var, c] : e.rates) v += c.convert_to<double>() * at.at(var);
    return v;
}

// Exact closure feasibility of the bound variables at fixed free values: a nonempty bounded
// polyhedron has a vertex, so try every choice of k tight rows.
bool extends(const ConstraintSystem& s, std::map<std::string, double> at) {
    const std::size_t k = s.bound_vars.size();
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (const auto& c : s.constraints) {
        const LinearExpr e = c.oriented();
        std::vector<double> row(k, 0.0);
        double rest = e.constant.convert_to<double>();
        for (const auto& [var, coef] : e.rates) {
            auto it = std::find(s.bound_vars.begin(), s.bound_vars.end(), var);
            if (it == s.bound_vars.end())
                rest += coef.convert_to<double>() * at.at(var);
            else
                row[std::size_t(it - s.bound_vars.begin())] = coef.convert_to<double>();
        }
        A.push_back(row);
        b.push_back(-rest);  // row . x <= b
    }
    const std::size_t m = A.size();
    std::vector<std::size_t> pick(k);
    const auto feasible = [&](const std::vector<double>& x) {
        for (std::size_t r = 0; r < m; ++r) {
            double lhs = 0.0;
            for (std::size_t q = 0; q < k; ++q) lhs += A[r][q] * x[q];
            if (lhs > b[r] + 1e-9) return false;
        }
        return true;
    };
    std::function<bool(std::size_t, std::size_t)> choose = [&](std::size_t depth,
                                                               std::size_t from) -> bool {
        if (depth == k) {
            std::vector<std::vector<double>> M(k, std::vector<double>(k + 1));
            for (std::size_t r = 0; r < k; ++r) {
                for (std::size_t q = 0; q < k; ++q) M[r][q] = A[pick[r]][q];
                M[r][k] = b[pick[r]];
            }
            for (std::size_t col = 0; col < k; ++col) {
                std::size_t piv = col;
                for (std::size_t r = col; r < k; ++r)
                    if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
                if (std::abs(M[piv][col]) < 1e-12) return false;
                std::swap(M[piv], M[col]);
                for (std::size_t r = 0; r < k; ++r) {
                    if (r == col) continue;
                    const double f = M[r][col] / M[col][col];
                    for (std::size_t q = col; q <= k; ++q) M[r][q] -= f * M[col][q];
                }
            }
            std::vector<double> x(k);
            for (std::size_t q = 0; q < k; ++q) x[q] = M[q][k] / M[q][q];
            return feasible(x);
        }
        for (std::size_t r = from; r < m; ++r) {
            pick[depth] = r;
            if (choose(depth + 1, r + 1)) return true;
        }
        return false;
    };
    return choose(0, 0);
}

ConstraintSystem random_numeric_system(Rng& rng, std::size_t bound) {
    std::uniform_int_distribution<int> coef(-3, 3);
    std::uniform_int_distribution<int> constant(-6, 6);
    std::vector<std::string> bvars;
    for (std::size_t k = 0; k < bound; ++k) bvars.push_back("x" + std::to_string(k));
    std::vector<Constraint> rows;
    for (const auto& x : bvars) {
        rows.push_back(make_constraint(rate(x), Relation::le, num(5), "box+ " + x));
        rows.push_back(make_constraint(rate(x), Relation::ge, num(-5), "box- " + x));
    }
    const std::size_t extra = 12 - rows.size();
    const Relation rels[] = {Relation::le, Relation::lt, Relation::ge};
    for (std::size_t r = 0; r < extra; ++r) {
        LinearExpr e;
        for (const char* v : {"R1", "R2"}) e.add_rate(v, coef(rng));
        for (const auto& x : bvars) e.add_rate(x, coef(rng));
        e.add_constant(constant(rng));
        rows.push_back(Constraint{e, rels[rng() % 3], "row " + std::to_string(r), {}});
    }
    return custom({"R1", "R2"}, bvars, rows);
}

JointDistribution gated_with_eavesdropper(std::uint64_t seed, double min_e) {
    for (std::uint64_t s = seed;; ++s) {
        Rng rng(s);
        auto j = gated_joint(rng);
        if (j.cond_mutual_info({V::V}, {V::Z}, {V::U}).bits > min_e) return j;
    }
}

}  // namespace

TEST(Presets, EveryNameResolvesAndValidates) {
    const auto names = preset_names();
    EXPECT_EQ(names.size(), 12u);
    for (const auto& n : names) {
        EXPECT_TRUE(is_preset(n));
        const auto s = preset_system(n);
        EXPECT_EQ(s.name, n);
        EXPECT_NO_THROW(s.validate());
    }
    EXPECT_THROW(preset_system("SYS-NOPE"), SystemError);
}

TEST(Presets, OldSystemShape) {
    const auto s = preset_system("SYS-OLD");
    EXPECT_EQ(s.count(Relation::eq), 2u);
    const std::vector<std::string> bound = {"Ra", "Rb",  "R1c", "R1d", "R2c", "R2d",
                                            "RD", "RD1", "RD2", "RL1", "RL2"};
    EXPECT_EQ(s.bound_vars, bound);
    EXPECT_EQ(s.free_vars, (std::vector<std::string>{"R1", "R2"}));
    for (const auto& v : bound) {
        EXPECT_TRUE(std::any_of(s.constraints.begin(), s.constraints.end(), [&](const Constraint& c) {
            return c.label == "nonneg " + v;
        })) << v;
    }
    const LinearExpr cover = rate("RL1") + rate("RL2") - info({V::V1}, {V::V2}, {V::V});
    EXPECT_TRUE(std::any_of(s.constraints.begin(), s.constraints.end(), [&](const Constraint& c) {
        return c.relation == Relation::gt && c.expr == cover;
    }));
}

TEST(Presets, OldRegionHasFourRateRowsAndFiveGates) {
    const auto s = preset_system("REG-OLD");
    std::size_t rate_rows = 0;
    for (const auto& c : s.constraints)
        if (c.expr.has_rates() && c.label.rfind("nonneg", 0) != 0) ++rate_rows;
    EXPECT_EQ(rate_rows, 4u);
    EXPECT_EQ(s.gates().size(), 5u);
    EXPECT_TRUE(s.bound_vars.empty());
}

TEST(Presets, SecondNewSystemDropsDummyRateAndAddsFloors) {
    const auto s = preset_system("SYS-NEW2");
    for (const auto& c : s.constraints) EXPECT_EQ(c.expr.rate("RD"), 0) << c.label;
    EXPECT_EQ(std::count(s.bound_vars.begin(), s.bound_vars.end(), "RD"), 0);
    for (const char* r : {"R1c", "R2c"}) {
        const LinearExpr floor = rate(r) - info({V::V}, {V::Z}, {V::U});
        EXPECT_TRUE(std::any_of(s.constraints.begin(), s.constraints.end(), [&](const Constraint& c) {
            return c.relation == Relation::ge && c.expr == floor;
        })) << r;
    }
}

TEST(InfoTerm, ParsePrintRoundTrip) {
    const auto t = InfoTerm::parse("I(V,V1;Y1|U)");
    EXPECT_EQ(t, InfoTerm::make({V::V, V::V1}, {V::Y1}, {V::U}));
    EXPECT_EQ(InfoTerm::parse(t.to_string()), t);
    EXPECT_EQ(InfoTerm::make({V::Y1}, {V::X}), InfoTerm::make({V::X}, {V::Y1}));
}

TEST(SubstituteEqualities, FoldsSplitIntoNonnegativity) {
    const auto s = custom({"R1", "R1d"}, {"Ra"},
                          {make_constraint(rate("R1"), Relation::eq, rate("Ra") + rate("R1d"), "split"),
                           make_constraint(rate("Ra"), Relation::ge, {}, "nonneg Ra")});
    const auto out = substitute_equalities(s);
    ASSERT_EQ(out.constraints.size(), 1u);
    EXPECT_EQ(out.constraints[0].relation == Relation::eq, false);
    EXPECT_TRUE(positively_proportional(out.constraints[0].oriented(), rate("R1d") - rate("R1")));
    EXPECT_TRUE(verify_certificate(out, 0));
}

TEST(SubstituteEqualities, DegenerateEqualityIsDropped) {
    const auto s = custom({"R1"}, {"Ra"},
                          {make_constraint(rate("R1"), Relation::eq, rate("Ra"), "split"),
                           make_constraint(rate("Ra"), Relation::eq, rate("R1"), "copy"),
                           make_constraint(rate("Ra"), Relation::ge, {}, "nonneg Ra")});
    const auto out = substitute_equalities(s);
    ASSERT_EQ(out.constraints.size(), 1u);
    EXPECT_TRUE(positively_proportional(out.constraints[0].oriented(), -rate("R1")));
}

TEST(SubstituteEqualities, OldSystemLeavesOnlyInequalities) {
    const auto out = substitute_equalities(preset_system("SYS-OLD"));
    EXPECT_EQ(out.count(Relation::eq), 0u);
    for (std::size_t k = 0; k < out.constraints.size(); ++k) EXPECT_TRUE(verify_certificate(out, k));
}

TEST(FourierMotzkin, OneVariableShadow) {
    const auto s = custom({"a", "b"}, {"x"},
                          {make_constraint(rate("x"), Relation::le, rate("a"), "upper"),
                           make_constraint(rate("x"), Relation::ge, rate("b"), "lower"),
                           make_constraint(rate("x"), Relation::ge, {}, "nonneg x")});
    const auto out = fm_eliminate(s, {"x"});
    ASSERT_EQ(out.constraints.size(), 2u);
    EXPECT_TRUE(contains_row(out, rate("b") - rate("a")));
    EXPECT_TRUE(contains_row(out, -rate("a")));
    for (const auto& c : out.constraints) EXPECT_EQ(c.relation, Relation::le);
}

TEST(FourierMotzkin, StrictParentGivesStrictChild) {
    const auto s = custom({"a"}, {"x"},
                          {make_constraint(rate("x"), Relation::lt, rate("a"), "upper"),
                           make_constraint(rate("x"), Relation::ge, {}, "nonneg x")});
    const auto out = fm_eliminate(s, {"x"});
    ASSERT_EQ(out.constraints.size(), 1u);
    EXPECT_EQ(out.constraints[0].relation, Relation::lt);
}

TEST(FourierMotzkin, CertificatesResumIndependently) {
    for (const char* name : {"SYS-OLD", "SYS-NEW2", "SYS-RED-1"}) {
        const auto out = fm_eliminate(preset_system(name));
        ASSERT_FALSE(out.constraints.empty());
        for (std::size_t k = 0; k < out.constraints.size(); ++k) {
            const auto& c = out.constraints[k];
            ASSERT_TRUE(verify_certificate(out, k)) << name << ": " << c.to_string();

            std::map<std::string, Rational> rates;
            std::map<InfoTerm, Rational> infos;
            Rational constant = 0;
            bool strict = false;
            for (const auto& [idx, lambda] : c.certificate) {
                const auto& b = out.basis.at(idx);
                if (b.relation != Relation::eq) ASSERT_GE(lambda, 0);
                if (is_strict(b.relation) && lambda > 0) strict = true;
                const Rational sign = (b.relation == Relation::ge || b.relation == Relation::gt) ? -1 : 1;
                for (const auto& [v, q] : b.expr.rates) rates[v] += sign * lambda * q;
                for (const auto& [t, q] : b.expr.infos) infos[t] += sign * lambda * q;
                constant += sign * lambda * b.expr.constant;
            }
            std::erase_if(rates, [](const auto& p) { return p.second == 0; });
            std::erase_if(infos, [](const auto& p) { return p.second == 0; });
            const LinearExpr o = c.oriented();
            EXPECT_EQ(rates, o.rates) << name << ": " << c.to_string();
            EXPECT_EQ(infos, o.infos) << name << ": " << c.to_string();
            EXPECT_EQ(constant, o.constant) << name << ": " << c.to_string();
            EXPECT_EQ(strict, is_strict(c.relation)) << name << ": " << c.to_string();
            for (const auto& v : out.bound_vars) EXPECT_EQ(o.rate(v), 0);
        }
    }
}

TEST(FourierMotzkin, ClosureCommutesWithProjection) {
    for (const char* name : {"SYS-OLD", "SYS-NEW1", "SYS-NEW2"}) {
        const auto a = relaxed(fm_eliminate(preset_system(name)));
        const auto b = fm_eliminate(relaxed(preset_system(name)));
        std::set<std::string> ra, rb;
        for (const auto& c : a.constraints) ra.insert(c.oriented().to_string());
        for (const auto& c : b.constraints) rb.insert(c.oriented().to_string());
        EXPECT_EQ(ra, rb) << name;
        for (const auto& c : a.constraints) EXPECT_FALSE(is_strict(c.relation));
    }
}

TEST(FourierMotzkin, AgreesWithGridProjectionOnRandomSystems) {
    Rng rng(20240601);
    std::size_t compared = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t bound = 1 + std::size_t(trial % 3);
        const auto sys = random_numeric_system(rng, bound);
        const auto out = fm_eliminate(relaxed(sys), sys.bound_vars);
        for (std::size_t k = 0; k < out.constraints.size(); ++k) ASSERT_TRUE(verify_certificate(out, k));
        for (int i = 0; i <= 30; ++i)
            for (int j = 0; j <= 30; ++j) {
                const std::map<std::string, double> at = {{"R1", -2.0 + 0.2 * i}, {"R2", -2.0 + 0.2 * j}};
                bool member = true, near = false;
                for (const auto& c : out.constraints) {
                    const LinearExpr e = c.oriented();
                    const double v = eval(e, at);
                    const double norm = std::hypot(e.rate("R1").convert_to<double>(),
                                                   e.rate("R2").convert_to<double>());
                    if (norm > 0 && std::abs(v) / norm < 1e-6) near = true;
                    if (v > 0) member = false;
                }
                if (near) continue;
                ++compared;
                ASSERT_EQ(member, extends(sys, at)) << "trial " << trial << " at (" << at.at("R1")
                                                    << "," << at.at("R2") << ")";
            }
    }
    EXPECT_GT(compared, 50000u);
}

TEST(FourierMotzkin, CapAbortsWithDiagnostic) {
    EXPECT_THROW(fm_eliminate(preset_system("SYS-OLD"), FmOptions{5}), FmCapExceeded);
}

TEST(Instantiate, SecondNewRegionGivesSixRowsAndFiveGates) {
    Rng rng(41);
    const auto j = random_joint(rng, 2, 2);
    const auto sys = preset_system("REG-NEW2-0");
    const auto inst = instantiate(sys, j);
    std::size_t rows = 0;
    for (const auto& h : inst.halfplanes)
        if (h.label.rfind("nonneg", 0) != 0) ++rows;
    EXPECT_EQ(rows, 6u);
    EXPECT_EQ(inst.gates.size(), 5u);

    std::size_t k = 0;
    for (const auto& c : sys.constraints) {
        if (!c.expr.has_rates()) continue;
        const LinearExpr e = c.oriented();
        double offset = e.constant.convert_to<double>();
        for (const auto& [t, q] : e.infos)
            offset += q.convert_to<double>() * j.cond_mutual_info(t.a, t.b, t.c).bits;
        const auto& h = inst.halfplanes.at(k++);
        EXPECT_EQ(h.label, c.label);
        EXPECT_NEAR(h.rhs, -offset, 1e-12);
        EXPECT_EQ(h.coeffs[0], e.rate("R1").convert_to<double>());
        EXPECT_EQ(h.coeffs[1], e.rate("R2").convert_to<double>());
        EXPECT_EQ(h.strict, is_strict(c.relation));
    }
}

TEST(Instantiate, IndependentEavesdropperRemovesSecrecyTerms) {
    const auto bsc = symmetric_channel(2, 0.1);
    const auto z = fixtures::uniform_rows(2, 2);
    Rng rng(43);
    auto f = random_joint(rng, 2, 2).factors();
    std::vector<FactorTable> fs(f.begin(), f.end());
    fs[4] = product_channel(2, bsc, symmetric_channel(2, 0.2), z);
    const auto j = build_joint(fs);
    const auto inst = instantiate(preset_system("REG-OLD"), j);
    const auto mi = [&](VarSet a, VarSet b, VarSet c = {}) { return j.cond_mutual_info(a, b, c).bits; };
    const double r1 = mi({V::U}, {V::Y1}) + mi({V::V, V::V1}, {V::Y1}, {V::U});
    const double r2 = mi({V::U}, {V::Y2}) + mi({V::V, V::V2}, {V::Y2}, {V::U});
    for (const auto& h : inst.halfplanes) {
        if (h.label == "rate-1") EXPECT_NEAR(h.rhs, r1, 1e-12);
        if (h.label == "rate-2") EXPECT_NEAR(h.rhs, r2, 1e-12);
        if (h.label == "difference-1") EXPECT_NEAR(h.rhs, mi({V::V, V::V1}, {V::Y1}, {V::U}), 1e-12);
    }
}

TEST(Instantiate, RateOnlySystemKeepsItsNumbers) {
    const auto s = custom({"R1", "R2"}, {},
                          {make_constraint(rate("R1", 2) + rate("R2"), Relation::le, num(Rational(7, 2)),
                                           "row")});
    const auto inst = instantiate(s, fixtures::BinaryChain{}.build());
    ASSERT_EQ(inst.halfplanes.size(), 1u);
    EXPECT_EQ(inst.halfplanes[0].coeffs, (std::vector<double>{2.0, 1.0}));
    EXPECT_EQ(inst.halfplanes[0].rhs, 3.5);
    EXPECT_TRUE(inst.gates.empty());
}

TEST(EquivCheck, ProjectedOldSystemsMatchTheOldRegion) {
    EquivOptions o;
    o.binary_samples = 30;
    o.ternary_samples = 3;
    o.grid = 200;
    for (const char* name : {"SYS-OLD", "SYS-OLDP"}) {
        const auto r = equiv_check(fm_eliminate(preset_system(name)), preset_system("REG-OLD"), o);
        EXPECT_EQ(r.verdict, Verdict::pass) << name << ": " << r.diagnostic;
        EXPECT_EQ(r.total_disagreement(), 0u);
        EXPECT_EQ(r.samples.size(), 33u);
    }
}

TEST(EquivCheck, OldVersusSecondNewFailsNearTheAxes) {
    EquivOptions o;
    o.binary_samples = 10;
    o.ternary_samples = 0;
    o.grid = 200;
    const auto r = equiv_check(preset_system("REG-OLD"), preset_system("REG-NEW2-0"), o);
    EXPECT_EQ(r.verdict, Verdict::fail);

    const auto j = gated_with_eavesdropper(5, 0.02);
    const double E = j.cond_mutual_info({V::V}, {V::Z}, {V::U}).bits;
    const auto old_sys = preset_system("REG-OLD");
    const auto new_sys = preset_system("REG-NEW2-0");
    const auto a = instantiate(old_sys, j);
    const auto b = instantiate(new_sys, j);
    const auto sample = compare_instances(a, b, 200, 1e-6);
    ASSERT_GT(sample.disagreeing_cells, 0u);
    ASSERT_FALSE(sample.witnesses.empty());
    const auto ra = region_from_instance(a, sample.rmax);
    const auto rb = region_from_instance(b, sample.rmax);
    const double cell = sample.rmax / 200.0;
    for (const auto& [x, y] : sample.witnesses) {
        EXPECT_TRUE(contains(ra, {x, y}, true));
        EXPECT_FALSE(contains(rb, {x, y}, true));
        EXPECT_LE(std::min(x, y), E + cell);
    }
}

TEST(SystemFile, PresetRoundTrip) {
    for (const auto& name : preset_names()) {
        const auto s = preset_system(name);
        const auto back = system_from_json(system_to_json(s));
        ASSERT_EQ(back.constraints.size(), s.constraints.size()) << name;
        for (std::size_t k = 0; k < s.constraints.size(); ++k) {
            EXPECT_EQ(back.constraints[k].expr, s.constraints[k].expr) << name;
            EXPECT_EQ(back.constraints[k].relation, s.constraints[k].relation) << name;
            EXPECT_EQ(back.constraints[k].label, s.constraints[k].label) << name;
        }
        EXPECT_EQ(back.collapse, s.collapse);
        EXPECT_EQ(back.bound_vars, s.bound_vars);
    }
}

TEST(SystemFile, ProjectionKeepsCertificates) {
    const auto fm = fm_eliminate(preset_system("SYS-NEW1"));
    const auto back = system_from_json(system_to_json(fm));
    ASSERT_EQ(back.basis.size(), fm.basis.size());
    for (std::size_t k = 0; k < back.constraints.size(); ++k) EXPECT_TRUE(verify_certificate(back, k));
}

TEST(SystemFile, ResolvesProjectionSyntax) {
    const auto s = resolve_system("FM(SYS-RED-2)");
    EXPECT_TRUE(s.bound_vars.empty());
    EXPECT_EQ(s.collapse, Collapse::collapse2);
}
