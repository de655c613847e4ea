#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bcsec/coding_sim.hpp"
#include "bcsec/dist_io.hpp"
#include "bcsec/geometry.hpp"
#include "bcsec/sampling.hpp"
#include "bcsec/suite.hpp"
#include "bcsec/system_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bcsec;

namespace {

enum Exit { kPass = 0, kFail = 1, kInconclusive = 2, kUsage = 3 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::uint64_t env_u64(const char* name, std::uint64_t fallback) {
    const char* v = std::getenv(name);
    if (!v || !*v) return fallback;
    try {
        std::size_t used = 0;
        const unsigned long long x = std::stoull(v, &used);
        if (used != std::string(v).size() || x == 0) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw UsageError(std::string(name) + " must be a positive integer");
    }
}

struct Caps {
    FmOptions fm;
    SimCaps sim;
};

Caps env_caps() {
    Caps c;
    c.fm.cap = env_u64("BCSEC_FM_CAP", c.fm.cap);
    c.sim.leakage = env_u64("BCSEC_LEAKAGE_CAP", c.sim.leakage);
    c.sim.decoder = env_u64("BCSEC_DECODER_CAP", c.sim.decoder);
    c.sim.codebook = env_u64("BCSEC_CODEBOOK_CAP", c.sim.codebook);
    return c;
}

json caps_json(const Caps& c) {
    return {{"fm", c.fm.cap},
            {"leakage", c.sim.leakage},
            {"decoder", c.sim.decoder},
            {"codebook", c.sim.codebook}};
}

void emit(const json& doc, const std::string& out) {
    const std::string text = doc.dump(2) + "\n";
    if (out.empty() || out == "-") {
        std::cout << text;
    } else {
        write_file_atomic(out, text);
        std::cerr << "wrote " << out << "\n";
    }
}

json point_json(Point p) { return json::array({p.r1, p.r2}); }

json region_json(const Region2D& r) {
    json v = json::array();
    for (const Point& p : r.vertices) v.push_back(point_json(p));
    return {{"vertices", v}, {"rmax", r.rmax}, {"gates_hold", r.gates_hold}, {"empty", r.empty()}};
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

// ---------------------------------------------------------------------------

struct DeriveArgs {
    std::string system, eliminate = "default", out;
};

int run_derive(const DeriveArgs& a, const Caps& caps) {
    const ConstraintSystem in = resolve_system(a.system, caps.fm);
    ConstraintSystem out;
    std::vector<std::string> order;
    if (a.eliminate == "default") {
        out = fm_eliminate(in, caps.fm);
        order = in.bound_vars;
    } else {
        order = split_list(a.eliminate);
        out = fm_eliminate(in, order, caps.fm);
    }
    std::size_t verified = 0;
    for (std::size_t k = 0; k < out.constraints.size(); ++k)
        if (verify_certificate(out, k)) ++verified;
    json doc = system_to_json(out);
    doc["provenance"] = {{"command", "derive"},
                         {"source", a.system},
                         {"eliminate", a.eliminate},
                         {"order", order},
                         {"caps", caps_json(caps)},
                         {"certificates_verified", verified},
                         {"constraints", out.constraints.size()}};
    emit(doc, a.out);
    return verified == out.constraints.size() ? kPass : kFail;
}

struct RegionArgs {
    std::string system, dist, out;
    double rmax = 0.0;
};

int run_region(const RegionArgs& a, const Caps& caps) {
    const ConstraintSystem sys = resolve_system(a.system, caps.fm);
    const JointDistribution j = load_joint(a.dist);
    const JointDistribution prepared = prepare_joint(sys, j);
    const Instance inst = instantiate(sys, prepared);
    const Region2D region = region_from_instance(inst, a.rmax > 0 ? std::optional(a.rmax) : std::nullopt);
    if (region.empty()) std::cerr << "warning: region is empty" << (region.gates_hold ? "" : " (gates fail)") << "\n";
    if (!a.out.empty()) export_region(region, a.out);

    json gates = json::array();
    for (const auto& g : inst.gates)
        gates.push_back({{"label", g.label}, {"slack", g.slack}, {"holds_closure", g.holds_closure},
                         {"holds_strict", g.holds_strict}});
    const SpecialPoints sp = special_points(j);
    json doc = {{"command", {{"name", "region"}, {"system", a.system}, {"dist", a.dist}, {"out", a.out},
                             {"rmax", a.rmax}, {"caps", caps_json(caps)}}},
                {"region", region_json(region)},
                {"gates", gates},
                {"special_points", {{"A", sp.A}, {"B", sp.B}, {"C", sp.C}, {"D", sp.D}, {"E", sp.E}}}};
    emit(doc, "");
    return kPass;
}

struct EquivArgs {
    std::string a, b, out;
    EquivOptions opt;
};

int run_equiv(const EquivArgs& a, const Caps& caps) {
    const ConstraintSystem sa = resolve_system(a.a, caps.fm);
    const ConstraintSystem sb = resolve_system(a.b, caps.fm);
    const EquivReport rep = equiv_check(sa, sb, a.opt);
    json bad = json::array();
    for (const auto& s : rep.samples) {
        if (s.disagreeing_cells == 0) continue;
        json w = json::array();
        for (const auto& [x, y] : s.witnesses) w.push_back({x, y});
        bad.push_back({{"sample", s.index}, {"alphabet", s.alphabet}, {"cells", s.disagreeing_cells},
                       {"rmax", s.rmax}, {"witnesses", w}});
    }
    json doc = {{"command", {{"name", "equiv"}, {"a", a.a}, {"b", a.b},
                             {"binary", a.opt.binary_samples}, {"ternary", a.opt.ternary_samples},
                             {"grid", a.opt.grid}, {"band", a.opt.band}, {"seed", a.opt.seed},
                             {"retry", a.opt.retry_budget}, {"caps", caps_json(caps)}}},
                {"verdict", verdict_name(rep.verdict)},
                {"diagnostic", rep.diagnostic},
                {"joints", rep.samples.size()},
                {"rejected", rep.skipped},
                {"disagreements", bad}};
    emit(doc, a.out);
    std::cerr << verdict_name(rep.verdict) << ": " << rep.diagnostic << "\n";
    return rep.verdict == Verdict::pass ? kPass : rep.verdict == Verdict::fail ? kFail : kInconclusive;
}

struct CasesArgs {
    std::string dir, out;
    std::vector<std::string> dists;
};

int run_cases(const CasesArgs& a) {
    std::vector<std::pair<std::string, fs::path>> inputs;
    if (a.dists.empty()) {
        for (int t = 1; t <= 4; ++t)
            inputs.emplace_back("T" + std::to_string(t), fs::path(a.dir) / ("T" + std::to_string(t) + ".json"));
    } else {
        for (const auto& d : a.dists) inputs.emplace_back(fs::path(d).stem().string(), d);
    }
    json rows = json::array();
    bool all_ok = true;
    for (const auto& [name, path] : inputs) {
        const CutResult c = classify_cut(load_joint(path));
        json row = {{"joint", path.string()}, {"applicable", c.applicable},
                    {"case", c.applicable ? std::string(cut_case_name(c.cut)) : "n/a"},
                    {"E", c.E}, {"B", c.B}, {"D", c.D}};
        if (name.size() == 2 && name[0] == 'T' && name[1] >= '1' && name[1] <= '4') {
            const bool ok = c.applicable && int(c.cut) == name[1] - '1';
            row["expected"] = std::string(cut_case_name(CutCase(name[1] - '1')));
            row["match"] = ok;
            all_ok = all_ok && ok;
        }
        all_ok = all_ok && c.applicable;
        rows.push_back(row);
    }
    emit({{"command", {{"name", "cases"}, {"dir", a.dir}, {"dist", a.dists}}}, {"joints", rows}}, a.out);
    return all_ok ? kPass : kFail;
}

struct RecoverArgs {
    std::string dist, out;
    std::size_t samples = 100, alphabet = 2;
    std::uint64_t seed = 1;
};

json recovery_json(const RecoveryResult& r) {
    return {{"applicable", r.applicable}, {"closed_member", r.closed_member},
            {"interior_member", r.interior_member}, {"coordinate", r.coordinate}};
}

int run_recover(const RecoverArgs& a) {
    std::vector<std::pair<std::string, JointDistribution>> joints;
    if (!a.dist.empty()) {
        joints.emplace_back(a.dist, load_joint(a.dist));
    } else {
        for (std::size_t k = 0; k < a.samples; ++k) {
            Rng rng(derive_seed(a.seed, k));
            joints.emplace_back("gated#" + std::to_string(k), gated_joint(rng, GatedFamily{a.alphabet}));
        }
    }
    json rows = json::array();
    std::size_t ok = 0, inapplicable = 0;
    for (const auto& [name, j] : joints) {
        const RecoveryResult s2 = recover_s2(j);
        const RecoveryResult s4 = recover_s4(j);
        const bool good = s2.applicable && s2.closed_member && s2.interior_member && s4.applicable &&
                          s4.closed_member && s4.interior_member;
        if (!s2.applicable || !s4.applicable) ++inapplicable;
        else if (good) ++ok;
        rows.push_back({{"joint", name}, {"s2", recovery_json(s2)}, {"s4", recovery_json(s4)}, {"pass", good}});
    }
    json doc = {{"command", {{"name", "recover"}, {"dist", a.dist}, {"samples", a.samples},
                             {"alphabet", a.alphabet}, {"seed", a.seed}}},
                {"passed", ok}, {"inapplicable", inapplicable}, {"joints", rows}};
    emit(doc, a.out);
    if (ok == joints.size()) return kPass;
    return ok + inapplicable == joints.size() ? kInconclusive : kFail;
}

struct MixArgs {
    std::string alpha, beta, out, mixture_out;
    std::vector<double> gammas;
    double eps = 1e-3;
};

int run_mix(const MixArgs& a) {
    const JointDistribution alpha = load_joint(a.alpha);
    const JointDistribution beta = a.beta.empty() ? substitute_aux(alpha, Collapse::collapse2) : load_joint(a.beta);
    const std::vector<double> gammas = a.gammas.empty() ? default_gamma_ladder() : a.gammas;
    json lin = json::array();
    bool identities = true;
    for (double g : gammas) {
        const double err = mixture_linearity_error(alpha, beta, g);
        identities = identities && err <= 1e-9;
        lin.push_back({{"gamma", g}, {"max_error", err}});
    }
    if (!a.mixture_out.empty())
        write_file_atomic(a.mixture_out, joint_to_json(timeshare_mix(alpha, beta, gammas.back())).dump(1) + "\n");
    json doc = {{"command", {{"name", "mix"}, {"alpha", a.alpha},
                             {"beta", a.beta.empty() ? "collapse2(alpha)" : a.beta},
                             {"gammas", gammas}, {"eps", a.eps}}},
                {"linearity", lin},
                {"identities_hold", identities}};
    int code = identities ? kPass : kFail;
    if (a.beta.empty()) {
        const ApproachResult ar = boundary_approach(alpha, gammas, a.eps);
        doc["boundary_approach"] = {{"success", ar.success},
                                    {"gamma", ar.gamma ? json(*ar.gamma) : json()},
                                    {"origin_applicable", ar.origin_applicable},
                                    {"axis_applicable", ar.axis_applicable},
                                    {"resolved", ar.resolved}, {"B", ar.B}, {"E", ar.E}};
        if (code == kPass && !ar.success) code = ar.resolved ? kFail : kInconclusive;
    }
    emit(doc, a.out);
    return code;
}

struct SimulateArgs {
    std::string config, dist, out;
    std::optional<std::size_t> codebooks, trials;
    std::optional<std::uint64_t> seed;
    bool no_side = false, no_leakage = false;
};

int run_simulate(const SimulateArgs& a, const Caps& caps) {
    const json doc = json::parse(read_file(a.config));
    json cdoc = doc;
    if (!cdoc.contains("caps")) cdoc["caps"] = {{"leakage", caps.sim.leakage}, {"decoder", caps.sim.decoder},
                                                {"codebook", caps.sim.codebook}};
    if (a.seed) cdoc["seeds"] = {{"master", *a.seed}};
    for (const char* k : {"codebooks", "trials", "side_information", "leakage"}) cdoc.erase(k);
    SchemeConfig config = config_from_json(cdoc);
    ExperimentOptions opt = options_from_json(doc);
    if (a.codebooks) opt.codebooks = *a.codebooks;
    if (a.trials) opt.trials = *a.trials;
    if (a.no_side) opt.side_information = false;
    if (a.no_leakage) opt.compute_leakage = false;

    fs::path dist = a.dist;
    if (dist.empty()) {
        if (config.channel.empty()) throw UsageError("no distribution: pass --dist or set \"channel\"");
        dist = fs::path(config.channel);
        if (dist.is_relative()) dist = fs::path(a.config).parent_path() / dist;
    }
    config.channel = dist.string();
    const ExperimentReport rep = run_experiment(config, load_joint(dist), opt);
    json out = report_to_json(rep);
    out["command"] = {{"name", "simulate"}, {"config", a.config}, {"dist", dist.string()}};
    emit(out, a.out);
    return kPass;
}

struct SuiteArgs {
    std::string only, out, data_dir;
    std::uint64_t seed = 1;
};

int run_suite_cmd(const SuiteArgs& a, const Caps& caps) {
    suite::SuiteOptions o;
    o.seed = a.seed;
    o.data_dir = a.data_dir.empty() ? suite::default_data_dir() : fs::path(a.data_dir);
    o.fm = caps.fm;
    o.caps = caps.sim;
    std::vector<int> ids;
    if (a.only.empty()) {
        for (int k = 1; k <= suite::kCriteria; ++k) ids.push_back(k);
    } else {
        for (const auto& s : split_list(a.only)) {
            const int id = std::stoi(s);
            if (id < 1 || id > suite::kCriteria) throw UsageError("no criterion " + s);
            ids.push_back(id);
        }
    }
    std::cout << "suite seed " << o.seed << ", data " << o.data_dir.string() << "\n";
    std::vector<suite::CriterionResult> results;
    for (int id : ids) {
        results.push_back(suite::run_criterion(id, o));
        std::cout << suite::summary_line(results.back()) << std::endl;
    }
    if (!a.out.empty()) {
        json doc = {{"command", {{"name", "suite"}, {"seed", o.seed}, {"only", ids},
                                 {"data_dir", o.data_dir.string()}, {"caps", caps_json(caps)}}},
                    {"results", json::array()}};
        for (const auto& r : results) doc["results"].push_back(suite::to_json(r));
        emit(doc, a.out);
    }
    return suite::exit_code(results);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bcsec: secrecy rate regions for the broadcast channel with receiver side information"};
    app.require_subcommand(1);

    DeriveArgs derive;
    auto* c_derive = app.add_subcommand("derive", "Fourier-Motzkin projection of a constraint system");
    c_derive->add_option("--system", derive.system, "preset name, FM(...) or system file")->required();
    c_derive->add_option("--eliminate", derive.eliminate, "comma-separated variables or 'default'");
    c_derive->add_option("--out", derive.out, "output system file (stdout if omitted)");

    RegionArgs region;
    auto* c_region = app.add_subcommand("region", "instantiate a region on a distribution and export it");
    c_region->add_option("--system", region.system, "preset name, FM(...) or system file")->required();
    c_region->add_option("--dist", region.dist, "distribution file")->required()->check(CLI::ExistingFile);
    c_region->add_option("--out", region.out, "export path ending in .csv or .svg");
    c_region->add_option("--rmax", region.rmax, "clip box side (default 1 + max |rhs|)");

    EquivArgs equiv;
    auto* c_equiv = app.add_subcommand("equiv", "numeric equivalence of two systems over sampled joints");
    c_equiv->add_option("a", equiv.a, "first system")->required();
    c_equiv->add_option("b", equiv.b, "reference system (its gates select joints)")->required();
    c_equiv->add_option("--samples", equiv.opt.binary_samples, "binary joints");
    c_equiv->add_option("--ternary", equiv.opt.ternary_samples, "ternary joints");
    c_equiv->add_option("--grid", equiv.opt.grid, "raster resolution per axis");
    c_equiv->add_option("--band", equiv.opt.band, "boundary band ignored by the raster");
    c_equiv->add_option("--seed", equiv.opt.seed, "sampling seed");
    c_equiv->add_option("--retry", equiv.opt.retry_budget, "redraws per sample slot");
    c_equiv->add_option("--out", equiv.out, "report file");

    CasesArgs cases;
    cases.dir = (suite::default_data_dir() / "cut_witnesses").string();
    auto* c_cases = app.add_subcommand("cases", "classify the origin cut of joints");
    c_cases->add_option("--dir", cases.dir, "directory with T1..T4 witnesses");
    c_cases->add_option("--dist", cases.dists, "distribution files (instead of --dir)");
    c_cases->add_option("--out", cases.out, "report file");

    RecoverArgs recover;
    auto* c_recover = app.add_subcommand("recover", "axis-point recovery by the reduced regions");
    c_recover->add_option("--dist", recover.dist, "distribution file (else sampled gated joints)");
    c_recover->add_option("--samples", recover.samples, "number of gated joints");
    c_recover->add_option("--alphabet", recover.alphabet, "alphabet size of sampled joints");
    c_recover->add_option("--seed", recover.seed, "sampling seed");
    c_recover->add_option("--out", recover.out, "report file");

    MixArgs mix;
    auto* c_mix = app.add_subcommand("mix", "time-sharing mixture identities and boundary approach");
    c_mix->add_option("--alpha", mix.alpha, "distribution file")->required();
    c_mix->add_option("--beta", mix.beta, "second distribution (default collapse-2 of alpha)");
    c_mix->add_option("--gamma", mix.gammas, "mixing weights")->delimiter(',');
    c_mix->add_option("--eps", mix.eps, "distance from the axes");
    c_mix->add_option("--mixture-out", mix.mixture_out, "write the mixture at the last gamma");
    c_mix->add_option("--out", mix.out, "report file");

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "run a coding experiment");
    c_sim->add_option("--config", sim.config, "simulation config")->required()->check(CLI::ExistingFile);
    c_sim->add_option("--dist", sim.dist, "distribution file (overrides the config's channel)");
    c_sim->add_option("--codebooks", sim.codebooks, "codebook count");
    c_sim->add_option("--trials", sim.trials, "Monte Carlo transmissions per codebook");
    c_sim->add_option("--seed", sim.seed, "master seed");
    c_sim->add_flag("--no-side-info", sim.no_side, "decoders ignore the other message");
    c_sim->add_flag("--no-leakage", sim.no_leakage, "skip exact leakage");
    c_sim->add_option("--out", sim.out, "report file");

    SuiteArgs st;
    auto* c_suite = app.add_subcommand("suite", "run the acceptance battery");
    c_suite->add_option("--only", st.only, "comma-separated criterion ids");
    c_suite->add_option("--seed", st.seed, "master seed");
    c_suite->add_option("--data-dir", st.data_dir, "directory containing cut_witnesses/");
    c_suite->add_option("--out", st.out, "JSON results file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kUsage;
    }

    try {
        const Caps caps = env_caps();
        if (*c_derive) return run_derive(derive, caps);
        if (*c_region) return run_region(region, caps);
        if (*c_equiv) return run_equiv(equiv, caps);
        if (*c_cases) return run_cases(cases);
        if (*c_recover) return run_recover(recover);
        if (*c_mix) return run_mix(mix);
        if (*c_sim) return run_simulate(sim, caps);
        if (*c_suite) return run_suite_cmd(st, caps);
    } catch (const FmCapExceeded& e) {
        std::cerr << "error: " << e.what() << " (raise BCSEC_FM_CAP)\n";
        return kFail;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
