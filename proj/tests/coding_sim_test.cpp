#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "bcsec/coding_sim.hpp"
#include "bcsec/rate_algebra.hpp"
#include "bcsec/sampling.hpp"
#include "bcsec/suite.hpp"
#include "test_joints.hpp"

using namespace bcsec;

namespace {

using V = Var;

SchemeConfig sized(std::size_t n, SegmentSizes s, Variant v = Variant::simplified2) {
    SchemeConfig c;
    c.n = n;
    c.sizes = s;
    c.variant = v;
    c.validate();
    return c;
}

std::vector<double> random_rows(Rng& rng, std::size_t rows, std::size_t width) {
    std::gamma_distribution<double> g(1.0);
    std::vector<double> t(rows * width);
    for (std::size_t r = 0; r < rows; ++r) {
        double sum = 0.0;
        for (std::size_t k = 0; k < width; ++k) sum += t[r * width + k] = g(rng);
        for (std::size_t k = 0; k < width; ++k) t[r * width + k] /= sum;
    }
    return t;
}

JointDistribution noiseless_copy_chain(std::size_t q) {
    const auto id = fixtures::identity_rows(q);
    return fixtures::copy_chain(q, id, id, id);
}

// L1 conditional typicality written out from the definition.
bool typical(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b, std::size_t nb,
             const std::vector<double>& cond, double delta) {
    std::map<std::pair<std::size_t, std::size_t>, double> joint;
    std::map<std::size_t, double> marg;
    const double n = double(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        joint[{a[k], b[k]}] += 1.0 / n;
        marg[a[k]] += 1.0 / n;
    }
    double l1 = 0.0;
    for (const auto& [x, px] : marg)
        for (std::size_t y = 0; y < nb; ++y) {
            const double p = cond[x * nb + y];
            const auto it = joint.find({x, y});
            const double emp = it == joint.end() ? 0.0 : it->second;
            if (emp > 0 && p == 0.0) return false;
            l1 += std::abs(emp - px * p);
        }
    return l1 <= delta;
}

std::size_t marton_failures_by_scan(const Codebook& cb, const SchemeConfig& c) {
    const auto& s = c.sizes;
    const auto& L = cb.laws;
    std::size_t failures = 0;
    for (std::size_t i1 = 0; i1 < c.messages(1); ++i1)
        for (std::size_t i2 = 0; i2 < c.messages(2); ++i2) {
            const Message m1 = message_at(c, 1, i1), m2 = message_at(c, 2, i2);
            for (std::size_t d1 = 0; d1 < s.ND1; ++d1)
                for (std::size_t d2 = 0; d2 < s.ND2; ++d2) {
                    const std::size_t k = (m1.a + m2.a) % s.Na;
                    const std::size_t vi = ((k * s.N1c + m1.c) * s.N2c + m2.c);
                    const auto vw = cb.v_word(vi);
                    std::vector<std::size_t> a(vw.begin(), vw.end());
                    bool found = false;
                    for (std::size_t l1 = 0; l1 < s.NL1 && !found; ++l1)
                        for (std::size_t l2 = 0; l2 < s.NL2 && !found; ++l2) {
                            const auto w1 = cb.v1_word(((vi * s.N1d + m1.d) * s.ND1 + d1) * s.NL1 + l1);
                            const auto w2 = cb.v2_word(((vi * s.N2d + m2.d) * s.ND2 + d2) * s.NL2 + l2);
                            std::vector<std::size_t> b(c.n);
                            for (std::size_t t = 0; t < c.n; ++t) b[t] = w1[t] * L.nv2 + w2[t];
                            found = typical(a, b, L.nv1 * L.nv2, L.pv12_v, c.delta);
                        }
                    if (!found) ++failures;
                    const auto e = encode_indices(cb, c, m1, m2, {0, d1, d2});
                    EXPECT_EQ(e.marton_failed, !found);
                }
        }
    return failures;
}

std::size_t tuples(const SchemeConfig& c) {
    const auto& s = c.sizes;
    return c.messages(1) * c.messages(2) * s.ND * s.ND1 * s.ND2;
}

}  // namespace

TEST(Pad, IdentityAndXor) {
    for (std::size_t m = 0; m < 5; ++m) EXPECT_EQ(pad(m, 0, 5), m);
    EXPECT_EQ(pad(1, 1, 2), 0u);
    EXPECT_EQ(pad(0, 1, 2), 1u);
    EXPECT_THROW(pad(2, 0, 2), SimulationError);
}

TEST(Pad, UniformKeyHidesTheMessage) {
    for (std::size_t Na = 1; Na <= 9; ++Na)
        for (std::size_t m1 = 0; m1 < Na; ++m1) {
            std::vector<std::size_t> count(Na, 0);
            for (std::size_t m2 = 0; m2 < Na; ++m2) ++count[pad(m1, m2, Na)];
            for (std::size_t k = 0; k < Na; ++k) EXPECT_EQ(count[k], 1u) << Na << " " << m1;
        }
}

TEST(Codebook, SingleWordChain) {
    const auto c = sized(5, {});
    const auto cb = generate_codebooks(c, fixtures::BinaryChain{}.build(), 3);
    EXPECT_EQ(cb.u.size(), 5u);
    EXPECT_EQ(cb.v.size(), 5u);
    EXPECT_EQ(cb.v1.size(), 5u);
    EXPECT_EQ(cb.v2.size(), 5u);
}

TEST(Codebook, ReproducibleUnderSeed) {
    SegmentSizes s;
    s.Na = 2;
    const auto c = sized(4, s);
    const auto j = fixtures::BinaryChain{}.build();
    const auto a = generate_codebooks(c, j, 77);
    const auto b = generate_codebooks(c, j, 77);
    EXPECT_EQ(a.u.size(), 8u);
    EXPECT_EQ(a.u, b.u);
    EXPECT_EQ(a.v, b.v);
    EXPECT_EQ(a.v1, b.v1);
    EXPECT_EQ(a.v2, b.v2);
    bool differs = false;
    for (std::uint64_t seed = 78; seed < 90 && !differs; ++seed)
        differs = generate_codebooks(c, j, seed).u != a.u;
    EXPECT_TRUE(differs);
}

TEST(Codebook, SymbolFrequenciesWithinThreeSigma) {
    fixtures::BinaryChain chain;
    chain.pu = {0.3, 0.7};
    const auto j = chain.build();
    const auto c = sized(4, {});
    const std::size_t regen = 10000;
    std::size_t zeros = 0, total = 0;
    for (std::size_t k = 0; k < regen; ++k) {
        const auto cb = generate_codebooks(c, j, derive_seed(2024, k));
        for (auto u : cb.u) zeros += u == 0;
        total += cb.u.size();
    }
    const double mean = 0.3 * double(total);
    const double sigma = std::sqrt(double(total) * 0.3 * 0.7);
    EXPECT_LE(std::abs(double(zeros) - mean), 3 * sigma) << zeros << " of " << total;
}

TEST(Codebook, CapRejectsOversizedTables) {
    SegmentSizes s;
    s.Na = 1024;
    auto c = sized(16, s);
    c.caps.codebook = 1000;
    EXPECT_THROW(generate_codebooks(c, fixtures::BinaryChain{}.build(), 1), SimulationError);
}

TEST(Encode, DegenerateLawsGiveAUniqueWord) {
    SegmentSizes s;
    s.Na = 2;
    const auto c = sized(6, s);
    const auto cb = generate_codebooks(c, noiseless_copy_chain(2), 9);
    Rng r1(1), r2(2);
    for (std::size_t a = 0; a < 2; ++a) {
        const auto x1 = encode(cb, c, {a, 0, 0, 0}, {1, 0, 0, 0}, {}, r1).x;
        const auto x2 = encode(cb, c, {a, 0, 0, 0}, {1, 0, 0, 0}, {}, r2).x;
        EXPECT_EQ(x1, x2);
        const auto vw = cb.v_word(pad(a, 1, 2));
        EXPECT_TRUE(std::equal(x1.begin(), x1.end(), vw.begin()));
    }
}

TEST(Encode, SingleBinWithCopiedAuxiliariesNeverFails) {
    SegmentSizes s;
    s.Na = 2;
    s.N1c = 2;
    s.N1d = 2;
    s.N2d = 2;
    const auto c = sized(8, s);
    const auto bsc = symmetric_channel(2, 0.1);
    const auto j = fixtures::copy_chain(2, bsc, bsc, bsc);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto cb = generate_codebooks(c, j, seed);
        for (std::size_t i1 = 0; i1 < c.messages(1); ++i1)
            for (std::size_t i2 = 0; i2 < c.messages(2); ++i2)
                EXPECT_FALSE(encode_indices(cb, c, message_at(c, 1, i1), message_at(c, 2, i2), {})
                                 .marton_failed);
    }
}

TEST(Encode, MartonFailuresMatchExhaustiveScan) {
    SegmentSizes s;
    s.Na = 2;
    s.N1d = 2;
    s.NL1 = 2;
    s.NL2 = 2;
    s.ND1 = 2;
    const auto c = sized(8, s);
    Rng rng(211);
    std::size_t nonzero = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const auto j = random_joint(rng, 2, 2);
        const auto cb = generate_codebooks(c, j, derive_seed(211, trial));
        const std::size_t failures = marton_failures_by_scan(cb, c);
        nonzero += failures > 0;
        const auto sum = exact_leakage_both(cb, c, cb.laws.pz_v12);
        EXPECT_NEAR(sum.encoding_failure_rate, double(failures) / double(tuples(c)), 1e-12);
    }
    EXPECT_GT(nonzero, 0u);
}

TEST(Typicality, ZeroProbabilityPairIsNeverTypical) {
    const std::vector<double> cond = {1.0, 0.0, 0.5, 0.5};
    const std::vector<std::size_t> a = {0, 0, 1, 1}, b = {0, 1, 0, 1};
    EXPECT_FALSE(conditionally_typical(a, b, 2, 2, cond, 10.0));
    const std::vector<std::size_t> b2 = {0, 0, 0, 1};
    EXPECT_TRUE(conditionally_typical(a, b2, 2, 2, cond, 1e-12));
}

TEST(Typicality, MatchesDefinitionOnRandomSequences) {
    Rng rng(223);
    for (int trial = 0; trial < 500; ++trial) {
        const auto cond = random_rows(rng, 3, 2);
        std::vector<std::size_t> a(10), b(10);
        for (auto& x : a) x = rng() % 3;
        for (auto& y : b) y = rng() % 2;
        EXPECT_EQ(conditionally_typical(a, b, 3, 2, cond, 0.6), typical(a, b, 2, cond, 0.6));
    }
}

TEST(Decode, NoiselessInjectiveCodebookAlwaysDecodes) {
    SegmentSizes s;
    s.Na = 2;
    s.N1c = 2;
    s.N2c = 2;
    auto c = sized(8, s);
    c.delta = 2.0;
    fixtures::BinaryChain chain;
    chain.pv12_v = {1, 0, 0, 0, 0, 0, 0, 1};
    chain.px_v12 = {1, 0, 1, 0, 0, 1, 0, 1};
    chain.channel = {1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1};
    const auto j = chain.build();
    for (std::uint64_t seed = 0;; ++seed) {
        ASSERT_LT(seed, 1000u);
        const auto cb = generate_codebooks(c, j, seed);
        std::set<std::vector<std::uint16_t>> words;
        for (std::size_t k = 0; k < c.v_words(); ++k) {
            const auto w = cb.v_word(k);
            words.emplace(w.begin(), w.end());
        }
        if (words.size() != c.v_words()) continue;
        Rng rng(seed);
        for (std::size_t i1 = 0; i1 < c.messages(1); ++i1)
            for (std::size_t i2 = 0; i2 < c.messages(2); ++i2) {
                const Message m1 = message_at(c, 1, i1), m2 = message_at(c, 2, i2);
                const auto x = encode(cb, c, m1, m2, {}, rng).x;
                const auto d1 = decode(cb, c, 1, x, m2);
                const auto d2 = decode(cb, c, 2, x, m1);
                ASSERT_TRUE(d1.message.has_value());
                ASSERT_TRUE(d2.message.has_value());
                EXPECT_EQ(*d1.message, m1);
                EXPECT_EQ(*d2.message, m2);
                EXPECT_EQ(d1.candidates, 1u);
            }
        break;
    }
}

TEST(Decode, AmbiguousCandidatesAreDeclaredErrors) {
    SegmentSizes s;
    s.N1c = 4;
    auto c = sized(1, s);
    c.delta = 2.0;
    const auto cb = generate_codebooks(c, noiseless_copy_chain(2), 5);
    Rng rng(5);
    std::size_t ambiguous = 0;
    for (std::size_t m = 0; m < 4; ++m) {
        const Message m1{0, 0, m, 0};
        const auto x = encode(cb, c, m1, {}, {}, rng).x;
        const auto d = decode(cb, c, 1, x, Message{});
        EXPECT_GE(d.candidates, 2u);
        EXPECT_FALSE(d.message.has_value());
        ambiguous += d.candidates >= 2;
    }
    EXPECT_EQ(ambiguous, 4u);
}

TEST(Decode, SideInformationIsNeverWorse) {
    Rng rng(227);
    std::uniform_int_distribution<int> pick(1, 2);
    std::size_t with_total = 0, without_total = 0;
    for (int trial = 0; trial < 20; ++trial) {
        SegmentSizes s;
        s.Na = trial % 2 == 0 ? 1 : 2;
        s.N1c = pick(rng);
        s.N2c = pick(rng);
        s.N1d = pick(rng);
        s.N2d = pick(rng);
        s.NL1 = pick(rng);
        auto c = sized(4, s);
        c.master_seed = derive_seed(227, trial);
        const auto j = random_joint(rng, 2, 2);

        const auto cb = generate_codebooks(c, j, c.master_seed);
        for (std::size_t i1 = 0; i1 < c.messages(1); ++i1)
            for (std::size_t i2 = 0; i2 < c.messages(2); ++i2) {
                const Message m1 = message_at(c, 1, i1), m2 = message_at(c, 2, i2);
                for (std::size_t y = 0; y < 16; ++y) {
                    const std::vector<std::uint16_t> yn = {std::uint16_t(y & 1), std::uint16_t(y >> 1 & 1),
                                                          std::uint16_t(y >> 2 & 1), std::uint16_t(y >> 3 & 1)};
                    for (int i = 1; i <= 2; ++i) {
                        const Message& own = i == 1 ? m1 : m2;
                        const Message& other = i == 1 ? m2 : m1;
                        const auto a = decode(cb, c, i, yn, other);
                        const auto b = decode(cb, c, i, yn, std::nullopt);
                        EXPECT_LE(a.candidates, b.candidates);
                        const bool a_err = a.message != own, b_err = b.message != own;
                        if (a.candidates > 0 && a_err) EXPECT_TRUE(b_err) << "trial " << trial << " y " << y;
                    }
                }
            }

        const auto a = run_experiment(c, j, {2, 100, true, false});
        const auto b = run_experiment(c, j, {2, 100, false, false});
        EXPECT_EQ(a.transmissions, b.transmissions);
        for (int i = 0; i < 2; ++i) with_total += a.errors[i], without_total += b.errors[i];
    }
    EXPECT_LE(with_total, without_total);
}

TEST(Decode, SymmetricChannelWellInsideTheRegion) {
    auto j = suite::trend_joint();
    auto f = j.factors();
    std::vector<FactorTable> fs(f.begin(), f.end());
    const auto main = symmetric_channel(2, 0.05);
    fs[4] = product_channel(2, main, main, symmetric_channel(2, 0.3));
    j = build_joint(fs);

    const auto inst = instantiate(fm_eliminate(preset_system("SYS-NEW2")), j);
    SchemeRates r;
    r.Ra = 0.1;
    r.R1c = 0.1;
    r.R2c = 0.05;
    r.RD1 = 0.1;
    const double R1 = r.Ra + r.R1c + r.R1d, R2 = r.Ra + r.R2c + r.R2d;
    for (const auto& h : inst.halfplanes)
        EXPECT_LT(h.coeffs[0] * R1 + h.coeffs[1] * R2, h.rhs - 0.05) << h.label;
    EXPECT_TRUE(inst.gates_hold());

    SchemeConfig c;
    c.n = 12;
    c.rates = r;
    c.sizes = sizes_from_rates(r, c.n);
    c.master_seed = 12;
    const auto rep = run_experiment(c, j, {10, 100, true, false});
    for (int i = 0; i < 2; ++i) EXPECT_LT(rep.error[i].estimate, 0.2) << "receiver " << i + 1;
}

TEST(Leakage, MatchesFullEnumerationOracle) {
    Rng rng(229);
    const Variant variants[] = {Variant::original, Variant::simplified1, Variant::simplified2};
    for (int trial = 0; trial < 60; ++trial) {
        const Variant v = variants[trial % 3];
        SegmentSizes s;
        for (auto* f : {&s.Na, &s.N1c, &s.N2c, &s.N1d, &s.N2d, &s.ND1, &s.ND2, &s.NL1, &s.NL2})
            *f = 1 + rng() % 2;
        if (v == Variant::original) {
            s.Nb = 1 + rng() % 2;
            s.ND = 1 + rng() % 2;
        } else if (v == Variant::simplified1) {
            s.ND = 1 + rng() % 2;
        }
        const auto c = sized(2, s, v);
        const auto j = random_joint(rng, 2, 2);
        const auto cb = generate_codebooks(c, j, derive_seed(229, trial));
        for (int i = 1; i <= 2; ++i)
            EXPECT_NEAR(exact_leakage(cb, c, j.channel(), i), suite::brute_force_leakage(cb, c, i), 1e-12)
                << "trial " << trial << " receiver " << i;
    }
}

TEST(Leakage, PadOnlySchemeIsPerfectlySecret) {
    Rng rng(233);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t q = 4;
        const auto j = fixtures::copy_chain(q, random_rows(rng, q, q), random_rows(rng, q, q),
                                           random_rows(rng, q, q));
        SegmentSizes s;
        s.Na = 4;
        const auto c = sized(3, s);
        const auto cb = generate_codebooks(c, j, derive_seed(233, trial));
        for (int i = 1; i <= 2; ++i) EXPECT_NEAR(exact_leakage(cb, c, j.channel(), i), 0.0, 1e-12);
    }
}

TEST(Leakage, IndependentEavesdropperLearnsNothing) {
    Rng rng(239);
    for (int trial = 0; trial < 10; ++trial) {
        auto f = random_joint(rng, 2, 2).factors();
        std::vector<FactorTable> fs(f.begin(), f.end());
        fs[4] = product_channel(2, random_rows(rng, 2, 2), random_rows(rng, 2, 2),
                                std::vector<double>{0.4, 0.6, 0.4, 0.6});
        const auto j = build_joint(fs);
        SegmentSizes s;
        for (auto* p : {&s.Na, &s.Nb, &s.N1c, &s.N2c, &s.N1d, &s.N2d, &s.ND, &s.ND1, &s.ND2, &s.NL1, &s.NL2})
            *p = 2;
        const auto c = sized(3, s, Variant::original);
        const auto cb = generate_codebooks(c, j, trial);
        const auto sum = exact_leakage_both(cb, c, cb.laws.pz_v12);
        EXPECT_NEAR(sum.bits_per_symbol[0], 0.0, 1e-12);
        EXPECT_NEAR(sum.bits_per_symbol[1], 0.0, 1e-12);
    }
}

TEST(Leakage, StaysWithinRateAndAlphabetBounds) {
    Rng rng(241);
    for (int trial = 0; trial < 40; ++trial) {
        SegmentSizes s;
        for (auto* p : {&s.Na, &s.N1c, &s.N2c, &s.N1d, &s.N2d, &s.NL1}) *p = 1 + rng() % 3;
        const auto c = sized(2, s);
        const auto j = random_joint(rng, 2, 2);
        const auto cb = generate_codebooks(c, j, trial);
        for (int i = 1; i <= 2; ++i) {
            const double l = exact_leakage(cb, c, j.channel(), i);
            EXPECT_GE(l, 0.0);
            EXPECT_LE(l, std::min(std::log2(double(c.messages(i))) / double(c.n), 1.0) + 1e-12);
        }
    }
}

TEST(Leakage, CapIsEnforced) {
    SegmentSizes s;
    s.Na = 4;
    auto c = sized(8, s);
    c.caps.leakage = 1000;
    const auto j = fixtures::BinaryChain{}.build();
    const auto cb = generate_codebooks(c, j, 1);
    EXPECT_THROW(exact_leakage(cb, c, j.channel(), 1), SimulationError);
}

TEST(Experiment, LeakageOnlyReport) {
    SegmentSizes s;
    s.Na = 2;
    const auto c = sized(3, s);
    const auto rep = run_experiment(c, fixtures::BinaryChain{}.build(), {1, 0, true, true});
    EXPECT_EQ(rep.transmissions, 0u);
    EXPECT_EQ(rep.leakage[0].size(), 1u);
    EXPECT_EQ(rep.codebook_seeds.size(), 1u);
    EXPECT_EQ(rep.codebook_seeds[0], derive_seed(c.master_seed, 0));
}

TEST(Experiment, IdenticalSeedsGiveIdenticalReports) {
    Rng rng(251);
    const auto j = random_joint(rng, 2, 2);
    SegmentSizes s;
    s.Na = 2;
    s.N1d = 2;
    s.NL2 = 2;
    auto c = sized(4, s);
    c.master_seed = 99;
    const ExperimentOptions o{3, 50, true, true};
    EXPECT_EQ(report_to_json(run_experiment(c, j, o)).dump(), report_to_json(run_experiment(c, j, o)).dump());
    c.master_seed = 100;
    EXPECT_NE(report_to_json(run_experiment(c, j, o)).dump(),
              report_to_json(run_experiment(sized(4, s), j, o)).dump());
}

TEST(Experiment, SimplifiedVariantsRunSideBySide) {
    SegmentSizes s;
    s.Na = 2;
    s.N1c = 2;
    const auto j = suite::trend_joint();
    for (Variant v : {Variant::simplified1, Variant::simplified2}) {
        const auto rep = run_experiment(sized(4, s, v), j, {2, 20, true, true});
        EXPECT_EQ(rep.config.variant, v);
        EXPECT_EQ(rep.transmissions, 40u);
    }
}

TEST(Experiment, WilsonIntervalMatchesFormula) {
    const auto iv = wilson_interval(5, 100);
    const double z = 1.959963984540054, n = 100, p = 0.05;
    const double centre = (p + z * z / (2 * n)) / (1 + z * z / n);
    const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / (1 + z * z / n);
    EXPECT_NEAR(iv.estimate, p, 1e-15);
    EXPECT_NEAR(iv.lo, centre - half, 1e-12);
    EXPECT_NEAR(iv.hi, centre + half, 1e-12);
    const auto none = wilson_interval(0, 0);
    EXPECT_EQ(none.lo, 0.0);
    EXPECT_EQ(none.hi, 1.0);
}

TEST(Config, ValidationRejectsVariantMismatches) {
    SegmentSizes s;
    s.Nb = 2;
    EXPECT_THROW(sized(4, s, Variant::simplified1), SimulationError);
    s = {};
    s.ND = 2;
    EXPECT_THROW(sized(4, s, Variant::simplified2), SimulationError);
    EXPECT_NO_THROW(sized(4, s, Variant::simplified1));
    EXPECT_THROW(sized(0, {}), SimulationError);
    s = {};
    s.Na = 0;
    EXPECT_THROW(sized(4, s), SimulationError);
}

TEST(Config, SizesFromRates) {
    SchemeRates r;
    r.Ra = 0.5;
    r.R1d = 0.25;
    r.RL1 = 0.3;
    const auto s = sizes_from_rates(r, 4);
    EXPECT_EQ(s.Na, 4u);
    EXPECT_EQ(s.N1d, 2u);
    EXPECT_EQ(s.NL1, 2u);  // 2^1.2 rounds to 2
    EXPECT_EQ(s.N2d, 1u);
    r.Ra = -0.1;
    EXPECT_THROW(sizes_from_rates(r, 4), SimulationError);
}

TEST(Config, JsonRoundTrip) {
    const nlohmann::json doc = {{"n", 6},
                                {"variant", "original"},
                                {"delta", 0.25},
                                {"sizes", {{"Na", 2}, {"Nb", 3}, {"ND", 2}, {"NL2", 2}}},
                                {"caps", {{"leakage", 1000000}}},
                                {"seeds", {{"master", 42}}},
                                {"channel", "chain.json"}};
    const auto c = config_from_json(doc);
    EXPECT_EQ(c.sizes.Nb, 3u);
    EXPECT_EQ(c.sizes.NL2, 2u);
    EXPECT_EQ(c.variant, Variant::original);
    EXPECT_EQ(c.caps.leakage, 1000000u);
    EXPECT_EQ(c.master_seed, 42u);
    const auto back = config_from_json(config_to_json(c));
    EXPECT_EQ(config_to_json(back), config_to_json(c));

    const auto from_rates = config_from_json({{"n", 4}, {"rates", {{"Ra", 0.5}}}});
    EXPECT_EQ(from_rates.sizes.Na, 4u);
    ASSERT_TRUE(from_rates.rates.has_value());
    EXPECT_EQ(config_to_json(config_from_json(config_to_json(from_rates))), config_to_json(from_rates));

    EXPECT_THROW(config_from_json({{"n", 4}, {"sizes", {{"Nx", 2}}}}), SimulationError);
    EXPECT_NO_THROW(config_from_json({{"n", 4}, {"sizes", {{"Na", 4}}}, {"rates", {{"Ra", 0.5}}}}));
    EXPECT_THROW(config_from_json({{"n", 4}, {"sizes", {{"Na", 2}}}, {"rates", {{"Ra", 0.5}}}}), SimulationError);
    EXPECT_THROW(config_from_json({{"n", 4}, {"variant", "fancy"}}), SimulationError);
}

TEST(Config, MessageIndexBijection) {
    SegmentSizes s;
    s.Na = 3;
    s.N1c = 2;
    s.N1d = 5;
    const auto c = sized(2, s);
    std::set<Message> seen;
    for (std::size_t k = 0; k < c.messages(1); ++k) {
        const auto m = message_at(c, 1, k);
        EXPECT_EQ(message_index(c, 1, m), k);
        seen.insert(m);
    }
    EXPECT_EQ(seen.size(), 30u);
}
