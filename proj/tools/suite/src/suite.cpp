#include "bcsec/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "bcsec/dist_io.hpp"
#include "bcsec/sampling.hpp"

#ifndef BCSEC_DATA_DIR
#define BCSEC_DATA_DIR "data"
#endif

namespace bcsec::suite {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string_view status_name(Status s) {
    switch (s) {
        case Status::pass: return "PASS";
        case Status::fail: return "FAIL";
        case Status::inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

std::filesystem::path default_data_dir() { return BCSEC_DATA_DIR; }

namespace {

double since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Status worst(Status a, Status b) {
    if (a == Status::fail || b == Status::fail) return Status::fail;
    if (a == Status::inconclusive || b == Status::inconclusive) return Status::inconclusive;
    return Status::pass;
}

JointDistribution gated(std::uint64_t seed, std::size_t alphabet) {
    Rng rng(seed);
    return gated_joint(rng, GatedFamily{alphabet});
}

const ConstraintSystem& preset(const std::string& name) {
    static std::map<std::string, ConstraintSystem> cache;
    auto it = cache.find(name);
    if (it == cache.end()) it = cache.emplace(name, preset_system(name)).first;
    return it->second;
}

// Both instances of a pair on one common box so polygons are comparable.
std::pair<Region2D, Region2D> common_regions(const ConstraintSystem& a, const ConstraintSystem& b,
                                             const JointDistribution& j) {
    const Instance ia = instantiate(a, prepare_joint(a, j));
    const Instance ib = instantiate(b, prepare_joint(b, j));
    const double rmax = 1.0 + std::max(ia.max_abs_rhs(), ib.max_abs_rhs());
    return {region_from_instance(ia, rmax), region_from_instance(ib, rmax)};
}

}  // namespace

// ---------------------------------------------------------------------------

CriterionResult derivation_equivalences(const SuiteOptions& o) {
    CriterionResult r{1, "derivation equivalences"};
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"SYS-OLD", "REG-OLD"},      {"SYS-OLDP", "REG-OLD"},       {"SYS-NEW1", "REG-OLD"},
        {"SYS-NEW2", "REG-NEW2-0"},  {"SYS-RED-1", "REG-NEW2-1"},   {"SYS-RED-2", "REG-NEW2-2"}};
    EquivOptions eo;
    eo.seed = derive_seed(o.seed, 1);
    Status status = Status::pass;
    std::ostringstream detail;
    r.data["pairs"] = json::array();
    for (const auto& [sys, reg] : pairs) {
        const auto t0 = Clock::now();
        const ConstraintSystem derived = fm_eliminate(preset(sys), o.fm);
        const EquivReport rep = equiv_check(derived, preset(reg), eo);
        const Status s = rep.verdict == Verdict::pass   ? Status::pass
                         : rep.verdict == Verdict::fail ? Status::fail
                                                        : Status::inconclusive;
        status = worst(status, s);
        detail << "FM(" << sys << ")~" << reg << " " << verdict_name(rep.verdict) << "; ";
        r.data["pairs"].push_back({{"derived", "FM(" + sys + ")"},
                                   {"reference", reg},
                                   {"verdict", verdict_name(rep.verdict)},
                                   {"joints", rep.samples.size()},
                                   {"disagreeing_cells", rep.total_disagreement()},
                                   {"diagnostic", rep.diagnostic},
                                   {"seconds", since(t0)}});
    }
    r.data["binary_joints"] = eo.binary_samples;
    r.data["ternary_joints"] = eo.ternary_samples;
    r.data["grid"] = eo.grid;
    r.data["band"] = eo.band;
    r.status = status;
    r.detail = detail.str() + std::to_string(eo.binary_samples) + "+" +
               std::to_string(eo.ternary_samples) + " joints, grid " + std::to_string(eo.grid);
    return r;
}

CriterionResult fm_certificates(const SuiteOptions& o) {
    CriterionResult r{2, "FM soundness certificates"};
    std::size_t total = 0, verified = 0;
    r.data["systems"] = json::array();
    for (const std::string name : {"SYS-OLD", "SYS-OLDP", "SYS-NEW1", "SYS-NEW2", "SYS-RED-1", "SYS-RED-2"}) {
        const ConstraintSystem out = fm_eliminate(preset(name), o.fm);
        std::size_t ok = 0;
        for (std::size_t k = 0; k < out.constraints.size(); ++k)
            if (!out.constraints[k].certificate.empty() && verify_certificate(out, k)) ++ok;
        total += out.constraints.size();
        verified += ok;
        r.data["systems"].push_back({{"system", name}, {"constraints", out.constraints.size()}, {"verified", ok}});
    }
    r.status = total > 0 && verified == total ? Status::pass : Status::fail;
    r.detail = std::to_string(verified) + "/" + std::to_string(total) +
               " emitted constraints reproduced exactly from their certificates";
    return r;
}

CriterionResult containment_and_cuts(const SuiteOptions& o) {
    CriterionResult r{3, "containment and cut structure"};
    const std::size_t binary = 200, ternary = 20;
    std::size_t checked = 0, not_contained = 0, not_exclusive = 0, e_violations = 0, skipped = 0;
    std::map<std::string, std::size_t> cases;
    for (std::size_t k = 0; k < binary + ternary; ++k) {
        const JointDistribution j = gated(derive_seed(derive_seed(o.seed, 3), k), k < binary ? 2 : 3);
        const CutResult cut = classify_cut(j);
        if (!cut.applicable) {
            ++skipped;
            continue;
        }
        ++checked;
        const auto [inner, outer] = common_regions(preset("REG-NEW2-0"), preset("REG-OLD"), j);
        if (!contains_region(outer, inner, 1e-9)) ++not_contained;

        const std::array<bool, 4> holds = {cut.E <= cut.B && cut.E <= cut.D,
                                           cut.E > cut.B && cut.E > cut.D,
                                           cut.E > cut.B && cut.E <= cut.D,
                                           cut.E <= cut.B && cut.E > cut.D};
        if (std::count(holds.begin(), holds.end(), true) != 1 || !holds[std::size_t(cut.cut)])
            ++not_exclusive;
        ++cases[std::string(cut_case_name(cut.cut))];

        const SpecialPoints sp = special_points(j);
        if (sp.E > sp.A + 1e-9 || sp.E > sp.C + 1e-9) ++e_violations;
    }

    std::size_t witnessed = 0;
    std::string missing;
    for (int t = 1; t <= 4; ++t) {
        const auto path = o.data_dir / "cut_witnesses" / ("T" + std::to_string(t) + ".json");
        try {
            const CutResult cut = classify_cut(load_joint(path));
            if (cut.applicable && int(cut.cut) == t - 1) ++witnessed;
            else missing += " T" + std::to_string(t);
        } catch (const std::exception& e) {
            missing += " T" + std::to_string(t) + "(" + e.what() + ")";
        }
    }

    r.data = {{"joints", checked},           {"gate_rejected", skipped},
              {"containment_failures", not_contained},
              {"cut_predicate_failures", not_exclusive},
              {"E_bound_failures", e_violations},
              {"cases", cases},
              {"witnesses_classified", witnessed}};
    const bool ok = checked > 0 && not_contained == 0 && not_exclusive == 0 && e_violations == 0 &&
                    witnessed == 4;
    r.status = ok ? Status::pass : Status::fail;
    std::ostringstream d;
    d << checked << " gated joints: " << not_contained << " containment failures, " << not_exclusive
      << " cut predicate failures, " << e_violations << " E>A or E>C; witnesses T1-T4 " << witnessed
      << "/4" << (missing.empty() ? "" : " (missing" + missing + ")");
    r.detail = d.str();
    return r;
}

CriterionResult recovery(const SuiteOptions& o) {
    CriterionResult r{4, "recovery of axis points and hull"};
    const std::size_t binary = 90, ternary = 10;
    std::size_t s2 = 0, s4 = 0, hull_ok = 0;
    double worst = 0.0;
    for (std::size_t k = 0; k < binary + ternary; ++k) {
        const JointDistribution j = gated(derive_seed(derive_seed(o.seed, 4), k), k < binary ? 2 : 3);
        const RecoveryResult a = recover_s2(j);
        const RecoveryResult b = recover_s4(j);
        if (a.applicable && a.closed_member && a.interior_member) ++s2;
        if (b.applicable && b.closed_member && b.interior_member) ++s4;

        const Region2D old = instantiate_region(preset("REG-OLD"), j);
        const Region2D hull = hull_union({instantiate_region(preset("REG-NEW2-0"), j),
                                          instantiate_region(preset("REG-NEW2-1"), j),
                                          instantiate_region(preset("REG-NEW2-2"), j)});
        double d = 0.0;
        for (const Point& p : old.vertices) d = std::max(d, distance_to_polygon(hull.vertices, p));
        worst = std::max(worst, d);
        if (d <= 1e-7) ++hull_ok;
    }
    const std::size_t n = binary + ternary;
    r.data = {{"joints", n}, {"recover_s2", s2}, {"recover_s4", s4}, {"hull_contains_old", hull_ok},
              {"worst_vertex_distance", worst}};
    r.status = s2 == n && s4 == n && hull_ok == n ? Status::pass : Status::fail;
    r.detail = "recover_s2 " + std::to_string(s2) + "/" + std::to_string(n) + ", recover_s4 " +
               std::to_string(s4) + "/" + std::to_string(n) + ", hull holds REG-OLD vertices " +
               std::to_string(hull_ok) + "/" + std::to_string(n) + " (worst " +
               fmt("%.2e", worst) + ")";
    return r;
}

CriterionResult mixtures(const SuiteOptions& o) {
    CriterionResult r{5, "time-sharing identities and boundary approach"};
    const std::size_t wanted = 50, budget = 2000;
    const double eps = 1e-3;
    const auto& ladder = default_gamma_ladder();
    std::size_t used = 0, unresolved = 0, linear_fail = 0, approach_fail = 0, draws = 0;
    double worst = 0.0;
    for (std::size_t k = 0; k < budget && used < wanted; ++k) {
        ++draws;
        const JointDistribution j = gated(derive_seed(derive_seed(o.seed, 5), k), 2);
        const ApproachResult ar = boundary_approach(j, ladder, eps);
        if (!ar.resolved) {
            ++unresolved;
            continue;
        }
        ++used;
        const JointDistribution beta = substitute_aux(j, Collapse::collapse2);
        double err = 0.0;
        for (double g : ladder) err = std::max(err, mixture_linearity_error(j, beta, g));
        worst = std::max(worst, err);
        if (err > 1e-9) ++linear_fail;
        if (!ar.success) ++approach_fail;
    }
    r.data = {{"joints", used},          {"draws", draws},
              {"unresolved_skipped", unresolved},
              {"linearity_failures", linear_fail},
              {"worst_linearity_error", worst},
              {"approach_failures", approach_fail},
              {"eps", eps},
              {"gammas", ladder}};
    if (linear_fail > 0 || approach_fail > 0) r.status = Status::fail;
    else if (used < wanted) r.status = Status::inconclusive;
    else r.status = Status::pass;
    r.detail = std::to_string(used) + " joints (" + std::to_string(unresolved) +
               " draws not resolving eps skipped): identities worst " + fmt("%.2e", worst) + ", " +
               std::to_string(approach_fail) + " boundary_approach failures";
    return r;
}

// ---------------------------------------------------------------------------
// Simulator

namespace {

bool oracle_typical(std::span<const std::uint16_t> v, std::span<const std::uint16_t> w1,
                    std::span<const std::uint16_t> w2, const SchemeLaws& L, double delta) {
    std::map<std::pair<std::size_t, std::size_t>, double> joint;
    std::map<std::size_t, double> marg;
    const double step = 1.0 / double(v.size());
    const std::size_t width = L.nv1 * L.nv2;
    for (std::size_t t = 0; t < v.size(); ++t) {
        const std::size_t b = std::size_t(w1[t]) * L.nv2 + w2[t];
        if (L.pv12_v[v[t] * width + b] == 0.0) return false;
        joint[{v[t], b}] += step;
        marg[v[t]] += step;
    }
    double dev = 0.0;
    for (const auto& [a, pa] : marg)
        for (std::size_t b = 0; b < width; ++b) {
            const auto it = joint.find({a, b});
            const double emp = it == joint.end() ? 0.0 : it->second;
            dev += std::abs(emp - pa * L.pv12_v[a * width + b]);
        }
    return dev <= delta;
}

double entropy_bits(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log2(v);
    return h;
}

}  // namespace

double brute_force_leakage(const Codebook& cb, const SchemeConfig& c, int i) {
    const auto& L = cb.laws;
    const auto& s = c.sizes;
    const std::size_t n = cb.n;
    std::size_t xn = 1, zn = 1;
    for (std::size_t t = 0; t < n; ++t) xn *= L.nx, zn *= L.nz;
    const std::size_t width = L.ny1 * L.ny2 * L.nz;

    // p(z|x) summed over (y1,y2)
    std::vector<double> pzx(L.nx * L.nz, 0.0);
    for (std::size_t x = 0; x < L.nx; ++x)
        for (std::size_t k = 0; k < width; ++k) pzx[x * L.nz + k % L.nz] += L.channel[x * width + k];

    const std::size_t Mi = c.messages(i);
    std::vector<double> joint(Mi * zn, 0.0);
    const double w = 1.0 / (double(c.messages(1)) * double(c.messages(2)) *
                            double(s.ND * s.ND1 * s.ND2));
    std::vector<std::size_t> xs(n), zs(n);

    for (std::size_t a1 = 0; a1 < s.Na; ++a1)
    for (std::size_t b1 = 0; b1 < s.Nb; ++b1)
    for (std::size_t c1 = 0; c1 < s.N1c; ++c1)
    for (std::size_t e1 = 0; e1 < s.N1d; ++e1)
    for (std::size_t a2 = 0; a2 < s.Na; ++a2)
    for (std::size_t b2 = 0; b2 < s.Nb; ++b2)
    for (std::size_t c2 = 0; c2 < s.N2c; ++c2)
    for (std::size_t e2 = 0; e2 < s.N2d; ++e2)
    for (std::size_t d = 0; d < s.ND; ++d)
    for (std::size_t d1 = 0; d1 < s.ND1; ++d1)
    for (std::size_t d2 = 0; d2 < s.ND2; ++d2) {
        const std::size_t k = (a1 + a2) % s.Na;
        const std::size_t kb = (b1 + b2) % s.Nb;
        const std::size_t vidx = (((k * s.Nb + kb) * s.N1c + c1) * s.N2c + c2) * s.ND + d;
        const std::size_t base1 = ((vidx * s.N1d + e1) * s.ND1 + d1) * s.NL1;
        const std::size_t base2 = ((vidx * s.N2d + e2) * s.ND2 + d2) * s.NL2;
        std::size_t pick1 = 0, pick2 = 0;
        bool found = false;
        for (std::size_t l1 = 0; l1 < s.NL1 && !found; ++l1)
            for (std::size_t l2 = 0; l2 < s.NL2 && !found; ++l2)
                if (oracle_typical(cb.v_word(vidx), cb.v1_word(base1 + l1), cb.v2_word(base2 + l2), L,
                                   c.delta)) {
                    pick1 = l1;
                    pick2 = l2;
                    found = true;
                }
        const std::size_t m = i == 1 ? ((a1 * s.Nb + b1) * s.N1c + c1) * s.N1d + e1
                                     : ((a2 * s.Nb + b2) * s.N2c + c2) * s.N2d + e2;
        for (std::size_t l1 = 0; l1 < s.NL1; ++l1)
        for (std::size_t l2 = 0; l2 < s.NL2; ++l2) {
            if (l1 != pick1 || l2 != pick2) continue;
            const auto w1 = cb.v1_word(base1 + l1);
            const auto w2 = cb.v2_word(base2 + l2);
            for (std::size_t xi = 0; xi < xn; ++xi) {
                double px = 1.0;
                for (std::size_t t = 0, r = xi; t < n; ++t, r /= L.nx) {
                    xs[t] = r % L.nx;
                    px *= L.px_v12[(std::size_t(w1[t]) * L.nv2 + w2[t]) * L.nx + xs[t]];
                }
                if (px == 0.0) continue;
                for (std::size_t zi = 0; zi < zn; ++zi) {
                    double pz = 1.0;
                    for (std::size_t t = 0, r = zi; t < n; ++t, r /= L.nz)
                        pz *= pzx[xs[t] * L.nz + r % L.nz];
                    joint[m * zn + zi] += w * px * pz;
                }
            }
        }
    }

    std::vector<double> pm(Mi, 0.0), pz(zn, 0.0);
    for (std::size_t m = 0; m < Mi; ++m)
        for (std::size_t z = 0; z < zn; ++z) {
            pm[m] += joint[m * zn + z];
            pz[z] += joint[m * zn + z];
        }
    return (entropy_bits(pm) + entropy_bits(pz) - entropy_bits(joint)) / double(n);
}

namespace {

JointDistribution pad_only_joint(Rng& rng) {
    const JointDistribution base = random_joint(rng, 2, 2);
    const auto& f = base.factors();
    std::vector<FactorTable> fs;
    fs.push_back(f[0]);
    fs.push_back(make_factor({Var::V}, {2}, {Var::U}, {2}, {1, 0, 0, 1}));
    fs.push_back(make_factor({Var::V1, Var::V2}, {2, 2}, {Var::V}, {2}, {1, 0, 0, 0, 0, 0, 0, 1}));
    fs.push_back(f[3]);
    fs.push_back(f[4]);
    return build_joint(fs);
}

JointDistribution z_independent_joint(Rng& rng) {
    const JointDistribution base = random_joint(rng, 2, 2);
    const auto& f = base.factors();
    const FactorTable& ch = f[4];
    const std::size_t ny1 = ch.child_sizes[0], ny2 = ch.child_sizes[1], nz = ch.child_sizes[2];
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> qz(nz);
    double sum = 0.0;
    for (double& v : qz) sum += (v = u(rng));
    for (double& v : qz) v /= sum;
    std::vector<double> probs(ch.probs.size(), 0.0);
    for (std::size_t x = 0; x < ch.rows(); ++x)
        for (std::size_t y = 0; y < ny1 * ny2; ++y) {
            double pyx = 0.0;
            for (std::size_t z = 0; z < nz; ++z) pyx += ch.at(x, y * nz + z);
            for (std::size_t z = 0; z < nz; ++z) probs[x * ch.row_width() + y * nz + z] = pyx * qz[z];
        }
    std::vector<FactorTable> fs(f.begin(), f.end());
    fs[4] = make_factor(ch.children, ch.child_sizes, ch.parents, ch.parent_sizes, probs);
    return build_joint(fs);
}

}  // namespace

CriterionResult simulator_exactness(const SuiteOptions& o) {
    CriterionResult r{6, "simulator exactness"};
    const std::uint64_t base = derive_seed(o.seed, 6);
    std::size_t instances = 0, mismatches = 0, idx = 0;
    double worst = 0.0;
    for (Variant variant : {Variant::original, Variant::simplified1, Variant::simplified2}) {
        for (unsigned mask = 0; mask < (1u << 11); ++mask) {
            SchemeConfig c;
            c.n = 2;
            c.variant = variant;
            c.caps = o.caps;
            std::array<std::size_t*, 11> f = {&c.sizes.Na,  &c.sizes.Nb,  &c.sizes.N1c, &c.sizes.N2c,
                                              &c.sizes.N1d, &c.sizes.N2d, &c.sizes.ND,  &c.sizes.ND1,
                                              &c.sizes.ND2, &c.sizes.NL1, &c.sizes.NL2};
            for (std::size_t b = 0; b < 11; ++b) *f[b] = (mask >> b) & 1u ? 2 : 1;
            if (variant != Variant::original && c.sizes.Nb != 1) continue;
            if (variant == Variant::simplified2 && c.sizes.ND != 1) continue;
            const std::uint64_t seed = derive_seed(base, idx++);
            Rng rng(seed);
            const JointDistribution j = random_joint(rng, 2, 2);
            const Codebook cb = generate_codebooks(c, j, derive_seed(seed, 1));
            const LeakageSummary got = exact_leakage_both(cb, c, cb.laws.pz_v12);
            ++instances;
            for (int i = 1; i <= 2; ++i) {
                const double d = std::abs(got.bits_per_symbol[std::size_t(i - 1)] -
                                          brute_force_leakage(cb, c, i));
                worst = std::max(worst, d);
                if (!(d <= 1e-12)) ++mismatches;
            }
        }
    }

    std::size_t pad_bad = 0, zind_bad = 0;
    double pad_worst = 0.0, zind_worst = 0.0;
    for (std::size_t k = 0; k < 20; ++k) {
        Rng rng(derive_seed(base, 100000 + k));
        SchemeConfig pc;
        pc.n = 4;
        pc.sizes.Na = 4;
        pc.caps = o.caps;
        const JointDistribution pj = pad_only_joint(rng);
        const Codebook pcb = generate_codebooks(pc, pj, derive_seed(base, 200000 + k));
        const auto pl = exact_leakage_both(pcb, pc, pcb.laws.pz_v12);
        for (double v : pl.bits_per_symbol) {
            pad_worst = std::max(pad_worst, std::abs(v));
            if (std::abs(v) > 1e-12) ++pad_bad;
        }

        SchemeConfig zc;
        zc.n = 3;
        zc.variant = Variant::original;
        zc.caps = o.caps;
        zc.sizes = {2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2};
        const JointDistribution zj = z_independent_joint(rng);
        const Codebook zcb = generate_codebooks(zc, zj, derive_seed(base, 300000 + k));
        const auto zl = exact_leakage_both(zcb, zc, zcb.laws.pz_v12);
        for (double v : zl.bits_per_symbol) {
            zind_worst = std::max(zind_worst, std::abs(v));
            if (std::abs(v) > 1e-12) ++zind_bad;
        }
    }
    r.data = {{"n2_instances", instances},   {"oracle_mismatches", mismatches},
              {"worst_oracle_gap", worst},   {"pad_channels", 20},
              {"pad_worst", pad_worst},      {"pad_failures", pad_bad},
              {"z_independent_channels", 20}, {"z_independent_worst", zind_worst},
              {"z_independent_failures", zind_bad}};
    r.status = mismatches == 0 && pad_bad == 0 && zind_bad == 0 ? Status::pass : Status::fail;
    r.detail = std::to_string(instances) + " n=2 binary instances vs enumeration oracle (worst gap " +
               fmt("%.1e", worst) + "); pad-only worst " + fmt("%.1e", pad_worst) +
               " on 20 channels; Z-independent worst " + fmt("%.1e", zind_worst) + " on 20 channels";
    return r;
}

JointDistribution trend_joint() {
    const auto bsc = [](double p) { return std::vector<double>{1 - p, p, p, 1 - p}; };
    std::vector<FactorTable> fs;
    fs.push_back(make_factor({Var::U}, {2}, {}, {}, {0.5, 0.5}));
    fs.push_back(make_factor({Var::V}, {2}, {Var::U}, {2}, bsc(0.5)));
    // V1 = V xor Bern(0.2), V2 = V
    fs.push_back(make_factor({Var::V1, Var::V2}, {2, 2}, {Var::V}, {2},
                             {0.8, 0.0, 0.2, 0.0, 0.0, 0.2, 0.0, 0.8}));
    fs.push_back(make_factor({Var::X}, {2}, {Var::V1, Var::V2}, {2, 2}, {1, 0, 1, 0, 0, 1, 0, 1}));
    fs.push_back(product_channel(2, bsc(0.0), bsc(0.0), bsc(0.3)));
    return build_joint(fs);
}

SchemeRates trend_rates() {
    SchemeRates r;
    r.Ra = 0.1;
    r.R1c = 0.15;
    r.R2c = 0.15;
    r.R1d = 0.25;
    r.RD1 = 0.15;
    return r;
}

namespace {

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) mx += x[k], my += y[k];
    mx /= double(x.size());
    my /= double(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    return sxy / sxx;
}

}  // namespace

CriterionResult simulator_behavior(const SuiteOptions& o) {
    CriterionResult r{7, "simulator leakage and error trend"};
    const auto t0 = Clock::now();
    const JointDistribution j = trend_joint();
    const SchemeRates rates = trend_rates();
    const double R1 = rates.Ra + rates.R1c + rates.R1d;
    const double R2 = rates.Ra + rates.R2c + rates.R2d;

    // (R1,R2) strictly inside the projected region, gates in closure.
    const Region2D region = instantiate_region(fm_eliminate(preset("SYS-NEW2"), o.fm), j);
    const bool inside = region.gates_hold && contains(region, {R1, R2}, false);

    // The explicit split against every SYS-NEW2 row.
    ConstraintSystem full = preset("SYS-NEW2");
    full.free_vars.insert(full.free_vars.end(), full.bound_vars.begin(), full.bound_vars.end());
    full.bound_vars.clear();
    const std::map<std::string, double> point = {
        {"R1", R1},          {"R2", R2},          {"Ra", rates.Ra},   {"R1c", rates.R1c},
        {"R1d", rates.R1d},  {"R2c", rates.R2c},  {"R2d", rates.R2d}, {"RD1", rates.RD1},
        {"RD2", rates.RD2},  {"RL1", rates.RL1},  {"RL2", rates.RL2}};
    const Instance inst = instantiate(full, j);
    bool split_feasible = inst.gates_hold();
    json tight = json::array();
    double min_strict_slack = std::numeric_limits<double>::infinity();
    for (const auto& h : inst.halfplanes) {
        double lhs = 0.0;
        for (std::size_t k = 0; k < inst.vars.size(); ++k) lhs += h.coeffs[k] * point.at(inst.vars[k]);
        const double slack = h.rhs - lhs;
        if (slack < -1e-12) split_feasible = false;
        if (h.strict) {
            if (slack <= 1e-12) tight.push_back(h.label);
            else min_strict_slack = std::min(min_strict_slack, slack);
        }
    }

    const std::vector<std::size_t> ns = {4, 6, 8, 10};
    ExperimentOptions eo;
    eo.codebooks = 8;
    eo.trials = 250;
    std::array<std::vector<double>, 2> lmax, pe;
    json runs = json::array();
    for (std::size_t n : ns) {
        SchemeConfig c;
        c.n = n;
        c.rates = rates;
        c.sizes = sizes_from_rates(rates, n);
        c.variant = Variant::simplified2;
        c.caps = o.caps;
        c.master_seed = derive_seed(o.seed, 7);
        const ExperimentReport rep = run_experiment(c, j, eo);
        for (std::size_t i = 0; i < 2; ++i) {
            lmax[i].push_back(rep.leakage_max[i]);
            pe[i].push_back(rep.error[i].estimate);
        }
        runs.push_back(report_to_json(rep));
    }
    const std::vector<double> x(ns.begin(), ns.end());
    bool trend_ok = true;
    std::ostringstream d;
    d << "(R1,R2)=(" << R1 << "," << R2 << ") " << (inside ? "inside" : "NOT inside");
    json per = json::array();
    for (std::size_t i = 0; i < 2; ++i) {
        const double slope = ols_slope(x, lmax[i]);
        const bool pe_ok = pe[i].back() < pe[i].front() || (pe[i].back() < 0.05 && pe[i].front() < 0.05);
        trend_ok = trend_ok && slope <= 0.0 && pe_ok;
        per.push_back({{"receiver", i + 1}, {"leakage_max", lmax[i]}, {"leakage_slope", slope},
                       {"error", pe[i]}});
        d << "; M" << i + 1 << " leakage slope " << fmt("%.2e", slope) << ", P_e " << fmt("%.3f", pe[i].front())
          << "->" << fmt("%.3f", pe[i].back());
    }
    const double secs = since(t0);
    r.data = {{"rate_point", {R1, R2}},          {"inside_projected_region", inside},
              {"split_feasible_in_closure", split_feasible},
              {"strict_rows_tight_at_split", tight},
              {"min_slack_other_strict_rows", min_strict_slack},
              {"receivers", per},                {"runs", runs}};
    r.status = inside && split_feasible && trend_ok && secs < 900.0 ? Status::pass : Status::fail;
    d << "; " << fmt("%.1f", secs) << " s";
    r.detail = d.str();
    return r;
}

// ---------------------------------------------------------------------------
// Geometry

bool halfplane_member(const std::vector<HalfPlane>& hs, double rmax, Point p) {
    if (!(p.r1 > 0.0 && p.r2 > 0.0 && p.r1 < rmax && p.r2 < rmax)) return false;
    return std::all_of(hs.begin(), hs.end(),
                       [&](const HalfPlane& h) { return h.a * p.r1 + h.b * p.r2 < h.c; });
}

bool polygon_member(const std::vector<Point>& poly, Point p) {
    if (poly.size() < 3) return false;
    for (std::size_t k = 0; k < poly.size(); ++k) {
        const Point& a = poly[k];
        const Point& b = poly[(k + 1) % poly.size()];
        if ((b.r1 - a.r1) * (p.r2 - a.r2) - (b.r2 - a.r2) * (p.r1 - a.r1) <= 0.0) return false;
    }
    return true;
}

CriterionResult geometry_oracle(const SuiteOptions& o) {
    CriterionResult r{8, "geometry oracle"};
    const std::size_t systems = 1000, grid = 80;
    const double rmax = 3.0, band = 1e-6;
    std::size_t mismatched_systems = 0, mismatched_points = 0, compared = 0;
    for (std::size_t k = 0; k < systems; ++k) {
        Rng rng(derive_seed(derive_seed(o.seed, 8), k));
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> offset(-0.5, 2.5);
        std::uniform_int_distribution<int> count(1, 7);
        std::vector<HalfPlane> hs(std::size_t(count(rng)));
        for (auto& h : hs) {
            h.a = normal(rng);
            h.b = normal(rng);
            h.c = offset(rng);
        }
        const Region2D poly = polygon_from_halfplanes(hs, rmax);
        std::size_t bad = 0;
        for (std::size_t gx = 0; gx < grid; ++gx)
            for (std::size_t gy = 0; gy < grid; ++gy) {
                const Point p{(double(gx) + 0.5) * rmax / double(grid),
                              (double(gy) + 0.5) * rmax / double(grid)};
                bool near = false;
                for (const auto& h : hs)
                    if (std::abs(h.a * p.r1 + h.b * p.r2 - h.c) / std::hypot(h.a, h.b) < band) near = true;
                if (near) continue;
                ++compared;
                if (halfplane_member(hs, rmax, p) != polygon_member(poly.vertices, p)) ++bad;
            }
        mismatched_points += bad;
        if (bad > 0) ++mismatched_systems;
    }

    const std::vector<HalfPlane> pent = {{1, 0, 3}, {0, 1, 2}, {1, 1, 4}};
    const Region2D pr = polygon_from_halfplanes(pent, 10.0);
    const std::vector<Point> expect = {{0, 0}, {3, 0}, {3, 1}, {2, 2}, {0, 2}};
    double gap = 0.0;
    for (const Point& e : expect) {
        double best = std::numeric_limits<double>::infinity();
        for (const Point& v : pr.vertices) best = std::min(best, std::hypot(v.r1 - e.r1, v.r2 - e.r2));
        gap = std::max(gap, best);
    }
    const bool pent_ok = pr.vertices.size() == expect.size() && gap <= 1e-9;
    r.data = {{"systems", systems},  {"grid", grid},
              {"points_compared", compared},
              {"mismatched_points", mismatched_points},
              {"mismatched_systems", mismatched_systems},
              {"pentagon_vertices", pr.vertices.size()},
              {"pentagon_gap", gap}};
    r.status = mismatched_points == 0 && pent_ok ? Status::pass : Status::fail;
    r.detail = std::to_string(systems) + " random systems, " + std::to_string(mismatched_points) +
               " grid mismatches; pentagon " + std::to_string(pr.vertices.size()) +
               " vertices, worst gap " + fmt("%.1e", gap);
    return r;
}

// ---------------------------------------------------------------------------

CriterionResult run_criterion(int id, const SuiteOptions& o) {
    const auto t0 = Clock::now();
    CriterionResult r;
    try {
        switch (id) {
            case 1: r = derivation_equivalences(o); break;
            case 2: r = fm_certificates(o); break;
            case 3: r = containment_and_cuts(o); break;
            case 4: r = recovery(o); break;
            case 5: r = mixtures(o); break;
            case 6: r = simulator_exactness(o); break;
            case 7: r = simulator_behavior(o); break;
            case 8: r = geometry_oracle(o); break;
            default: throw std::invalid_argument("no criterion " + std::to_string(id));
        }
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception& e) {
        r.id = id;
        r.title = "error";
        r.status = Status::fail;
        r.detail = e.what();
    }
    r.seconds = since(t0);
    return r;
}

std::vector<CriterionResult> run_suite(const SuiteOptions& o, const std::vector<int>& ids) {
    std::vector<CriterionResult> out;
    for (int id : ids) out.push_back(run_criterion(id, o));
    return out;
}

std::string summary_line(const CriterionResult& r) {
    return "criterion " + std::to_string(r.id) + " " + std::string(status_name(r.status)) + "  " +
           r.title + ": " + r.detail + " (" + fmt("%.1f", r.seconds) + " s)";
}

json to_json(const CriterionResult& r) {
    return {{"criterion", r.id},
            {"title", r.title},
            {"status", status_name(r.status)},
            {"detail", r.detail},
            {"seconds", round12(r.seconds)},
            {"data", r.data}};
}

int exit_code(const std::vector<CriterionResult>& results) {
    Status s = Status::pass;
    for (const auto& r : results) s = worst(s, r.status);
    return s == Status::pass ? 0 : s == Status::fail ? 1 : 2;
}

}  // namespace bcsec::suite
