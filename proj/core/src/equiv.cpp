#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bcsec/rate_algebra.hpp"
#include "bcsec/sampling.hpp"

namespace bcsec {

std::string_view verdict_name(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

std::size_t EquivReport::total_disagreement() const {
    std::size_t n = 0;
    for (const auto& s : samples) n += s.disagreeing_cells;
    return n;
}

JointSource default_joint_source() {
    return [](std::uint64_t seed, std::size_t alphabet) {
        Rng rng(seed);
        return gated_joint(rng, GatedFamily{alphabet});
    };
}

namespace {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool empty() const { return lo > hi; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

// Gates within the band of their boundary count as holding, like cells near a line.
bool gates_open(const Instance& inst, double band) {
    return std::all_of(inst.gates.begin(), inst.gates.end(),
                       [&](const GateValue& g) { return g.holds_closure || g.slack >= -band; });
}

Interval row_interval(const Instance& inst, bool open, double y, double rmax) {
    Interval iv{0.0, rmax};
    if (!open) return {1.0, 0.0};
    for (const auto& h : inst.halfplanes) {
        const double a = h.coeffs[0];
        const double b = h.coeffs[1];
        const double rest = h.rhs - b * y;
        if (a > 0) {
            iv.hi = std::min(iv.hi, rest / a);
        } else if (a < 0) {
            iv.lo = std::max(iv.lo, rest / a);
        } else if (rest < 0) {
            return {1.0, 0.0};
        }
    }
    return iv;
}

bool near_line(const Instance& inst, double x, double y, double band) {
    for (const auto& h : inst.halfplanes) {
        const double a = h.coeffs[0];
        const double b = h.coeffs[1];
        const double norm = std::hypot(a, b);
        if (norm == 0.0) continue;
        if (std::abs(a * x + b * y - h.rhs) / norm < band) return true;
    }
    return false;
}

// Box side covering every axis intercept of both instances with a 25% margin.
double raster_extent(const Instance& a, const Instance& b) {
    double m = 0.0;
    for (const Instance* inst : {&a, &b})
        for (const auto& h : inst->halfplanes)
            for (double c : h.coeffs)
                if (c != 0.0) m = std::max(m, std::abs(h.rhs / c));
    return m > 0.0 ? 1.25 * m : 1.0;
}

}  // namespace

EquivSample compare_instances(const Instance& a, const Instance& b, std::size_t grid, double band) {
    if (a.vars.size() != 2 || b.vars.size() != 2)
        throw SystemError("equivalence raster needs exactly two free variables");
    EquivSample s;
    s.rmax = raster_extent(a, b);
    const double h = s.rmax / double(grid);
    const bool open_a = gates_open(a, band);
    const bool open_b = gates_open(b, band);
    std::size_t excluded = 0;
    for (std::size_t j = 0; j < grid; ++j) {
        const double y = (double(j) + 0.5) * h;
        const Interval ia = row_interval(a, open_a, y, s.rmax);
        const Interval ib = row_interval(b, open_b, y, s.rmax);
        if (ia.empty() && ib.empty()) continue;
        for (std::size_t i = 0; i < grid; ++i) {
            const double x = (double(i) + 0.5) * h;
            if (ia.contains(x) == ib.contains(x)) continue;
            if (near_line(a, x, y, band) || near_line(b, x, y, band)) {
                ++excluded;
                continue;
            }
            ++s.disagreeing_cells;
            if (s.witnesses.size() < 8) s.witnesses.emplace_back(x, y);
        }
    }
    s.counted_cells = grid * grid - excluded;
    return s;
}

EquivReport equiv_check(const ConstraintSystem& a, const ConstraintSystem& b,
                        const EquivOptions& options, const JointSource& source) {
    EquivReport report;
    const std::size_t total = options.binary_samples + options.ternary_samples;
    std::size_t exhausted = 0;
    for (std::size_t k = 0; k < total; ++k) {
        const std::size_t alphabet = k < options.binary_samples ? 2 : 3;
        bool done = false;
        for (std::size_t attempt = 0; attempt <= options.retry_budget && !done; ++attempt) {
            const auto seed = derive_seed(options.seed, k * 1000 + attempt);
            const JointDistribution j = source(seed, alphabet);
            const Instance ib = instantiate(b, prepare_joint(b, j));
            if (!ib.gates_hold()) {
                ++report.skipped;
                continue;
            }
            const Instance ia = instantiate(a, prepare_joint(a, j));
            EquivSample s = compare_instances(ia, ib, options.grid, options.band);
            s.index = k;
            s.alphabet = alphabet;
            report.samples.push_back(std::move(s));
            done = true;
        }
        if (!done) ++exhausted;
    }

    const std::size_t bad = report.total_disagreement();
    std::ostringstream diag;
    diag << report.samples.size() << " joints compared, " << report.skipped << " rejected by gates, "
         << bad << " disagreeing cells";
    if (bad > 0) {
        report.verdict = Verdict::fail;
    } else if (exhausted > 0 || report.samples.empty()) {
        report.verdict = Verdict::inconclusive;
        diag << ", " << exhausted << " sample slots exhausted the retry budget";
    } else {
        report.verdict = Verdict::pass;
    }
    report.diagnostic = diag.str();
    return report;
}

}  // namespace bcsec
