#include "bcsec/probability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bcsec {

namespace {

constexpr std::array<std::string_view, kNumVars> kVarNames = {"U",  "V",  "V1", "V2",
                                                              "X",  "Y1", "Y2", "Z"};

std::size_t product_of(std::span<const std::size_t> sizes) {
    return std::accumulate(sizes.begin(), sizes.end(), std::size_t{1}, std::multiplies<>());
}

double plogp(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

struct ChainShape {
    std::vector<Var> children;
    std::vector<Var> parents;
};

const std::array<ChainShape, 5>& chain_shape() {
    static const std::array<ChainShape, 5> shape = {{
        {{Var::U}, {}},
        {{Var::V}, {Var::U}},
        {{Var::V1, Var::V2}, {Var::V}},
        {{Var::X}, {Var::V1, Var::V2}},
        {{Var::Y1, Var::Y2, Var::Z}, {Var::X}},
    }};
    return shape;
}

}  // namespace

std::string_view var_name(Var v) { return kVarNames[std::size_t(v)]; }

Var parse_var(std::string_view name) {
    for (std::size_t i = 0; i < kNumVars; ++i)
        if (kVarNames[i] == name) return Var(i);
    throw DistributionError("unknown variable label '" + std::string(name) + "'");
}

std::vector<Var> VarSet::members() const {
    std::vector<Var> out;
    for (Var v : kAllVars)
        if (contains(v)) out.push_back(v);
    return out;
}

std::string VarSet::to_string() const {
    std::string s;
    for (Var v : members()) {
        if (!s.empty()) s += ',';
        s += var_name(v);
    }
    return s;
}

VarSet VarSet::parse(std::string_view text) {
    VarSet out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find(',', pos);
        if (end == std::string_view::npos) end = text.size();
        auto tok = text.substr(pos, end - pos);
        while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
        while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
        if (!tok.empty()) out = out | VarSet{parse_var(tok)};
        pos = end + 1;
    }
    return out;
}

Alphabet Alphabet::atomic(Var label, std::size_t size) {
    if (size == 0) throw DistributionError("alphabet size must be positive");
    return Alphabet{label, size, {}};
}

Alphabet Alphabet::product(Var label, std::vector<std::size_t> factors) {
    const std::size_t size = product_of(factors);
    if (size == 0) throw DistributionError("alphabet size must be positive");
    return Alphabet{label, size, std::move(factors)};
}

std::size_t Alphabet::compose(std::span<const std::size_t> parts) const {
    if (parts.size() != factors.size()) throw DistributionError("product index arity mismatch");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts[i] >= factors[i]) throw DistributionError("product index out of range");
        idx = idx * factors[i] + parts[i];
    }
    return idx;
}

std::vector<std::size_t> Alphabet::decompose(std::size_t index) const {
    std::vector<std::size_t> parts(factors.size());
    for (std::size_t i = factors.size(); i-- > 0;) {
        parts[i] = index % factors[i];
        index /= factors[i];
    }
    return parts;
}

std::size_t FactorTable::rows() const { return product_of(parent_sizes); }
std::size_t FactorTable::row_width() const { return product_of(child_sizes); }

void FactorTable::validate(double tol) const {
    if (children.size() != child_sizes.size() || parents.size() != parent_sizes.size())
        throw DistributionError("factor label/size arity mismatch");
    if (probs.size() != rows() * row_width())
        throw DistributionError("factor table has " + std::to_string(probs.size()) +
                                " entries, expected " + std::to_string(rows() * row_width()));
    const std::size_t w = row_width();
    for (std::size_t r = 0; r < rows(); ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < w; ++c) {
            const double p = probs[r * w + c];
            if (!(p >= -tol && p <= 1.0 + tol))
                throw DistributionError("factor entry outside [0,1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > tol)
            throw DistributionError("factor row " + std::to_string(r) + " sums to " +
                                    std::to_string(sum));
    }
}

FactorTable make_factor(std::vector<Var> children, std::vector<std::size_t> child_sizes,
                        std::vector<Var> parents, std::vector<std::size_t> parent_sizes,
                        std::vector<double> probs) {
    FactorTable f{std::move(children), std::move(parents), std::move(child_sizes),
                  std::move(parent_sizes), std::move(probs)};
    f.validate();
    return f;
}

JointDistribution build_joint(std::vector<FactorTable> factors) {
    if (factors.size() != 5)
        throw DistributionError("expected 5 chain factors, got " + std::to_string(factors.size()));
    std::array<Alphabet, kNumVars> alphabets;
    std::array<bool, kNumVars> seen{};
    for (std::size_t f = 0; f < 5; ++f) {
        const auto& ft = factors[f];
        for (std::size_t i = 0; i < ft.children.size() && i < ft.child_sizes.size(); ++i) {
            const auto k = std::size_t(ft.children[i]);
            alphabets[k] = Alphabet::atomic(ft.children[i], ft.child_sizes[i]);
            seen[k] = true;
        }
    }
    for (std::size_t k = 0; k < kNumVars; ++k)
        if (!seen[k]) throw DistributionError("variable " + std::string(kVarNames[k]) + " missing");
    return build_joint(std::move(factors), alphabets);
}

JointDistribution build_joint(std::vector<FactorTable> factors,
                              const std::array<Alphabet, kNumVars>& alphabets) {
    if (factors.size() != 5)
        throw DistributionError("expected 5 chain factors, got " + std::to_string(factors.size()));
    const auto& shape = chain_shape();
    for (std::size_t f = 0; f < 5; ++f) {
        const auto& ft = factors[f];
        if (ft.children != shape[f].children || ft.parents != shape[f].parents)
            throw DistributionError("factor " + std::to_string(f) +
                                    " does not match the chain p(u)p(v|u)p(v1,v2|v)p(x|v1,v2)"
                                    "p(y1,y2,z|x)");
        ft.validate();
        for (std::size_t i = 0; i < ft.children.size(); ++i)
            if (ft.child_sizes[i] != alphabets[std::size_t(ft.children[i])].size)
                throw DistributionError("shape mismatch for " +
                                        std::string(var_name(ft.children[i])));
        for (std::size_t i = 0; i < ft.parents.size(); ++i)
            if (ft.parent_sizes[i] != alphabets[std::size_t(ft.parents[i])].size)
                throw DistributionError("shape mismatch for parent " +
                                        std::string(var_name(ft.parents[i])));
    }

    JointDistribution j;
    j.alphabets_ = alphabets;
    for (std::size_t k = 0; k < kNumVars; ++k) j.alphabets_[k].label = Var(k);
    std::size_t stride = 1;
    for (std::size_t k = kNumVars; k-- > 0;) {
        j.strides_[k] = stride;
        stride *= j.alphabets_[k].size;
    }
    j.pmf_.assign(stride, 0.0);

    const auto s = [&](Var v) { return j.alphabets_[std::size_t(v)].size; };
    const auto& pu = factors[0].probs;
    const auto& pv = factors[1].probs;
    const auto& pvv = factors[2].probs;
    const auto& px = factors[3].probs;
    const auto& pch = factors[4].probs;
    const std::size_t nV = s(Var::V), nV1 = s(Var::V1), nV2 = s(Var::V2), nX = s(Var::X);
    const std::size_t nOut = s(Var::Y1) * s(Var::Y2) * s(Var::Z);

    std::size_t idx = 0;
    for (std::size_t u = 0; u < s(Var::U); ++u)
        for (std::size_t v = 0; v < nV; ++v) {
            const double a = pu[u] * pv[u * nV + v];
            for (std::size_t v1 = 0; v1 < nV1; ++v1)
                for (std::size_t v2 = 0; v2 < nV2; ++v2) {
                    const double b = a * pvv[(v * nV1 + v1) * nV2 + v2];
                    for (std::size_t x = 0; x < nX; ++x) {
                        const double c = b * px[(v1 * nV2 + v2) * nX + x];
                        for (std::size_t o = 0; o < nOut; ++o) j.pmf_[idx++] = c * pch[x * nOut + o];
                    }
                }
        }
    j.factors_ = {std::move(factors[0]), std::move(factors[1]), std::move(factors[2]),
                  std::move(factors[3]), std::move(factors[4])};
    return j;
}

double JointDistribution::prob(std::span<const std::size_t> tuple) const {
    if (tuple.size() != kNumVars) throw DistributionError("tuple arity mismatch");
    std::size_t idx = 0;
    for (std::size_t k = 0; k < kNumVars; ++k) {
        if (tuple[k] >= alphabets_[k].size) throw DistributionError("tuple index out of range");
        idx += tuple[k] * strides_[k];
    }
    return pmf_[idx];
}

std::vector<double> JointDistribution::marginal(VarSet vars) const {
    std::array<std::size_t, kNumVars> sz{};
    std::array<std::size_t, kNumVars> ostride{};
    std::size_t out_size = 1;
    for (std::size_t k = kNumVars; k-- > 0;) {
        sz[k] = alphabets_[k].size;
        if (vars.contains(Var(k))) {
            ostride[k] = out_size;
            out_size *= sz[k];
        }
    }
    std::vector<double> out(out_size, 0.0);
    std::array<std::size_t, kNumVars> t{};
    std::size_t oi = 0;
    for (double p : pmf_) {
        out[oi] += p;
        for (std::size_t k = kNumVars; k-- > 0;) {
            ++t[k];
            oi += ostride[k];
            if (t[k] < sz[k]) break;
            oi -= ostride[k] * sz[k];
            t[k] = 0;
        }
    }
    return out;
}

double JointDistribution::entropy(VarSet vars) const {
    if (vars.empty()) return 0.0;
    double h = 0.0;
    for (double p : marginal(vars)) h += plogp(p);
    return h;
}

InfoValue JointDistribution::cond_mutual_info(VarSet a, VarSet b, VarSet c) const {
    if (!a.disjoint(b) || !a.disjoint(c) || !b.disjoint(c))
        throw DistributionError("I(" + a.to_string() + ";" + b.to_string() + "|" + c.to_string() +
                                ") has overlapping variable sets");
    if (a.empty() || b.empty()) return {0.0};
    const double v = entropy(a | c) + entropy(b | c) - entropy(a | b | c) - entropy(c);
    if (v < 0.0) {
        if (v < -kProbTol)
            throw DistributionError("negative conditional mutual information " + std::to_string(v));
        return {0.0};
    }
    return {v};
}

std::string_view collapse_name(Collapse c) {
    switch (c) {
        case Collapse::none: return "none";
        case Collapse::collapse1: return "collapse-1";
        case Collapse::collapse2: return "collapse-2";
    }
    return "none";
}

Collapse parse_collapse(std::string_view name) {
    if (name == "none" || name.empty()) return Collapse::none;
    if (name == "collapse-1") return Collapse::collapse1;
    if (name == "collapse-2") return Collapse::collapse2;
    throw DistributionError("unknown substitution mode '" + std::string(name) + "'");
}

JointDistribution substitute_aux(const JointDistribution& j, Collapse mode) {
    if (mode == Collapse::none) return j;
    const bool keep1 = mode == Collapse::collapse2;  // private auxiliary that survives
    const std::size_t nU = j.size(Var::U), nV = j.size(Var::V);
    const std::size_t nV1 = j.size(Var::V1), nV2 = j.size(Var::V2), nX = j.size(Var::X);
    const std::size_t nKeep = keep1 ? nV1 : nV2;
    const std::size_t nDrop = keep1 ? nV2 : nV1;
    const auto& f = j.factors();
    const auto pvv = [&](std::size_t v, std::size_t v1, std::size_t v2) {
        return f[2].probs[(v * nV1 + v1) * nV2 + v2];
    };
    const auto pv_u = [&](std::size_t u, std::size_t v) { return f[1].probs[u * nV + v]; };
    const auto px = [&](std::size_t v1, std::size_t v2, std::size_t x) {
        return f[3].probs[(v1 * nV2 + v2) * nX + x];
    };
    // p(keep | v) and p(drop | v, keep)
    const auto joint_kd = [&](std::size_t v, std::size_t k, std::size_t d) {
        return keep1 ? pvv(v, k, d) : pvv(v, d, k);
    };

    const std::size_t nPair = nV * nKeep;
    std::vector<double> u_probs = f[0].probs;
    std::vector<double> v_given_u(nU * nU, 0.0);
    for (std::size_t u = 0; u < nU; ++u) v_given_u[u * nU + u] = 1.0;

    // children ordered (V1', V2'); the surviving one is the (V, V_keep) pair, the other copies U.
    std::vector<double> pair_given_v(nU * nPair * nU, 0.0);
    for (std::size_t u = 0; u < nU; ++u)
        for (std::size_t v = 0; v < nV; ++v)
            for (std::size_t k = 0; k < nKeep; ++k) {
                double pk = 0.0;
                for (std::size_t d = 0; d < nDrop; ++d) pk += joint_kd(v, k, d);
                const double p = pv_u(u, v) * pk;
                const std::size_t pair = v * nKeep + k;
                const std::size_t c1 = keep1 ? pair : u;
                const std::size_t c2 = keep1 ? u : pair;
                const std::size_t n2 = keep1 ? nU : nPair;
                pair_given_v[u * (nPair * nU) + c1 * n2 + c2] = p;
            }

    const std::size_t n1p = keep1 ? nPair : nU;
    const std::size_t n2p = keep1 ? nU : nPair;
    std::vector<double> x_given(n1p * n2p * nX, 0.0);
    for (std::size_t v = 0; v < nV; ++v)
        for (std::size_t k = 0; k < nKeep; ++k) {
            double pk = 0.0;
            for (std::size_t d = 0; d < nDrop; ++d) pk += joint_kd(v, k, d);
            std::vector<double> row(nX, 0.0);
            for (std::size_t d = 0; d < nDrop; ++d) {
                const double w = pk > 0.0 ? joint_kd(v, k, d) / pk : 1.0 / double(nDrop);
                for (std::size_t x = 0; x < nX; ++x)
                    row[x] += w * (keep1 ? px(k, d, x) : px(d, k, x));
            }
            const std::size_t pair = v * nKeep + k;
            for (std::size_t u = 0; u < nU; ++u) {
                const std::size_t c1 = keep1 ? pair : u;
                const std::size_t c2 = keep1 ? u : pair;
                std::copy(row.begin(), row.end(), x_given.begin() + (c1 * n2p + c2) * nX);
            }
        }

    std::array<Alphabet, kNumVars> al;
    for (Var v : kAllVars) al[std::size_t(v)] = j.alphabet(v);
    al[std::size_t(Var::U)] = Alphabet::atomic(Var::U, nU);
    al[std::size_t(Var::V)] = Alphabet::atomic(Var::V, nU);
    const Alphabet pair_alpha = Alphabet::product(keep1 ? Var::V1 : Var::V2, {nV, nKeep});
    al[std::size_t(Var::V1)] = keep1 ? pair_alpha : Alphabet::atomic(Var::V1, nU);
    al[std::size_t(Var::V2)] = keep1 ? Alphabet::atomic(Var::V2, nU) : pair_alpha;

    std::vector<FactorTable> fs;
    fs.push_back(make_factor({Var::U}, {nU}, {}, {}, std::move(u_probs)));
    fs.push_back(make_factor({Var::V}, {nU}, {Var::U}, {nU}, std::move(v_given_u)));
    fs.push_back(make_factor({Var::V1, Var::V2}, {n1p, n2p}, {Var::V}, {nU},
                             std::move(pair_given_v)));
    fs.push_back(make_factor({Var::X}, {nX}, {Var::V1, Var::V2}, {n1p, n2p}, std::move(x_given)));
    fs.push_back(f[4]);
    return build_joint(std::move(fs), al);
}

JointDistribution timeshare_mix(const JointDistribution& alpha, const JointDistribution& beta,
                                double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw DistributionError("gamma must lie in (0,1]");
    for (Var v : {Var::X, Var::Y1, Var::Y2, Var::Z})
        if (alpha.size(v) != beta.size(v))
            throw DistributionError("channel alphabets differ between mixture components");
    const auto& ca = alpha.channel().probs;
    const auto& cb = beta.channel().probs;
    for (std::size_t i = 0; i < ca.size(); ++i)
        if (std::abs(ca[i] - cb[i]) > 1e-12)
            throw DistributionError("channel law differs between mixture components");

    const JointDistribution* comp[2] = {&alpha, &beta};
    const double weight[2] = {gamma, 1.0 - gamma};
    const auto m = [&](Var v) { return std::max(alpha.size(v), beta.size(v)); };
    const std::size_t mU = m(Var::U), mV = m(Var::V), m1 = m(Var::V1), m2 = m(Var::V2);
    const std::size_t nX = alpha.size(Var::X);
    const std::size_t nU = 2 * mU, nV = 2 * mV, n1 = 2 * m1, n2 = 2 * m2;

    std::vector<double> pu(nU, 0.0), pv(nU * nV, 0.0), pvv(nV * n1 * n2, 0.0), px(n1 * n2 * nX, 0.0);
    for (std::size_t q = 0; q < 2; ++q) {
        const auto& j = *comp[q];
        const auto& f = j.factors();
        const std::size_t cU = j.size(Var::U), cV = j.size(Var::V);
        const std::size_t c1 = j.size(Var::V1), c2 = j.size(Var::V2);
        for (std::size_t u = 0; u < mU; ++u) {
            const std::size_t up = q * mU + u;
            if (u < cU) {
                pu[up] = weight[q] * f[0].probs[u];
                for (std::size_t v = 0; v < cV; ++v) pv[up * nV + q * mV + v] = f[1].probs[u * cV + v];
            } else {
                pv[up * nV + q * mV] = 1.0;
            }
        }
        for (std::size_t v = 0; v < mV; ++v) {
            const std::size_t vp = q * mV + v;
            double* row = &pvv[vp * n1 * n2];
            if (v < cV) {
                for (std::size_t a = 0; a < c1; ++a)
                    for (std::size_t b = 0; b < c2; ++b)
                        row[(q * m1 + a) * n2 + q * m2 + b] = f[2].probs[(v * c1 + a) * c2 + b];
            } else {
                row[(q * m1) * n2 + q * m2] = 1.0;
            }
        }
        for (std::size_t a = 0; a < c1; ++a)
            for (std::size_t b = 0; b < c2; ++b)
                for (std::size_t x = 0; x < nX; ++x)
                    px[((q * m1 + a) * n2 + q * m2 + b) * nX + x] = f[3].probs[(a * c2 + b) * nX + x];
    }
    // unreachable (V1',V2') combinations get a uniform input law
    for (std::size_t r = 0; r < n1 * n2; ++r) {
        double s = 0.0;
        for (std::size_t x = 0; x < nX; ++x) s += px[r * nX + x];
        if (s == 0.0)
            for (std::size_t x = 0; x < nX; ++x) px[r * nX + x] = 1.0 / double(nX);
    }

    std::array<Alphabet, kNumVars> al;
    for (Var v : kAllVars) al[std::size_t(v)] = alpha.alphabet(v);
    al[std::size_t(Var::U)] = Alphabet::product(Var::U, {2, mU});
    al[std::size_t(Var::V)] = Alphabet::product(Var::V, {2, mV});
    al[std::size_t(Var::V1)] = Alphabet::product(Var::V1, {2, m1});
    al[std::size_t(Var::V2)] = Alphabet::product(Var::V2, {2, m2});

    std::vector<FactorTable> fs;
    fs.push_back(make_factor({Var::U}, {nU}, {}, {}, std::move(pu)));
    fs.push_back(make_factor({Var::V}, {nV}, {Var::U}, {nU}, std::move(pv)));
    fs.push_back(make_factor({Var::V1, Var::V2}, {n1, n2}, {Var::V}, {nV}, std::move(pvv)));
    fs.push_back(make_factor({Var::X}, {nX}, {Var::V1, Var::V2}, {n1, n2}, std::move(px)));
    fs.push_back(alpha.channel());
    return build_joint(std::move(fs), al);
}

}  // namespace bcsec
