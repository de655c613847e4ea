#include "bcsec/coding_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>

namespace bcsec {

using nlohmann::json;

std::string_view variant_name(Variant v) {
    switch (v) {
        case Variant::original: return "original";
        case Variant::simplified1: return "simplified1";
        case Variant::simplified2: return "simplified2";
    }
    return "?";
}

Variant parse_variant(std::string_view s) {
    if (s == "original") return Variant::original;
    if (s == "simplified1") return Variant::simplified1;
    if (s == "simplified2") return Variant::simplified2;
    throw SimulationError("unknown variant '" + std::string(s) + "'");
}

SegmentSizes sizes_from_rates(const SchemeRates& r, std::size_t n) {
    auto size = [n](double rate) -> std::size_t {
        if (!(rate >= 0.0)) throw SimulationError("rates must be nonnegative");
        return std::max<std::size_t>(1, std::size_t(std::llround(std::exp2(double(n) * rate))));
    };
    SegmentSizes s;
    s.Na = size(r.Ra);
    s.Nb = size(r.Rb);
    s.N1c = size(r.R1c);
    s.N2c = size(r.R2c);
    s.N1d = size(r.R1d);
    s.N2d = size(r.R2d);
    s.ND = size(r.RD);
    s.ND1 = size(r.RD1);
    s.ND2 = size(r.RD2);
    s.NL1 = size(r.RL1);
    s.NL2 = size(r.RL2);
    return s;
}

void SchemeConfig::validate() const {
    if (n == 0) throw SimulationError("blocklength must be positive");
    const auto& s = sizes;
    for (std::size_t v : {s.Na, s.Nb, s.N1c, s.N2c, s.N1d, s.N2d, s.ND, s.ND1, s.ND2, s.NL1, s.NL2})
        if (v == 0) throw SimulationError("all segment sizes must be at least 1");
    if (variant != Variant::original && s.Nb != 1)
        throw SimulationError("simplified variants have no b-segment (Nb must be 1)");
    if (variant == Variant::simplified2 && s.ND != 1)
        throw SimulationError("simplified2 has no common randomness (ND must be 1)");
    if (!(delta > 0.0)) throw SimulationError("typicality delta must be positive");
}

std::size_t SchemeConfig::messages(int i) const {
    const std::size_t c = i == 1 ? sizes.N1c : sizes.N2c;
    const std::size_t d = i == 1 ? sizes.N1d : sizes.N2d;
    return sizes.Na * sizes.Nb * c * d;
}

std::size_t SchemeConfig::v_words() const {
    return sizes.Na * sizes.Nb * sizes.N1c * sizes.N2c * sizes.ND;
}

std::size_t pad(std::size_t m1a, std::size_t m2a, std::size_t Na) {
    if (m1a >= Na || m2a >= Na) throw SimulationError("pad operands out of range");
    return (m1a + m2a) % Na;
}

SchemeLaws scheme_laws(const JointDistribution& j) {
    SchemeLaws L;
    L.nu = j.size(Var::U);
    L.nv = j.size(Var::V);
    L.nv1 = j.size(Var::V1);
    L.nv2 = j.size(Var::V2);
    L.nx = j.size(Var::X);
    L.ny1 = j.size(Var::Y1);
    L.ny2 = j.size(Var::Y2);
    L.nz = j.size(Var::Z);
    const auto& f = j.factors();
    L.pu = f[0].probs;
    L.pv_u = f[1].probs;
    L.pv12_v = f[2].probs;
    L.px_v12 = f[3].probs;
    L.channel = f[4].probs;

    const std::size_t pairs = L.nv1 * L.nv2;
    L.pv1_v.assign(L.nv * L.nv1, 0.0);
    L.pv2_v.assign(L.nv * L.nv2, 0.0);
    for (std::size_t v = 0; v < L.nv; ++v)
        for (std::size_t a = 0; a < L.nv1; ++a)
            for (std::size_t b = 0; b < L.nv2; ++b) {
                const double p = L.pv12_v[v * pairs + a * L.nv2 + b];
                L.pv1_v[v * L.nv1 + a] += p;
                L.pv2_v[v * L.nv2 + b] += p;
            }

    L.py1_v12.assign(pairs * L.ny1, 0.0);
    L.py2_v12.assign(pairs * L.ny2, 0.0);
    const std::size_t width = L.ny1 * L.ny2 * L.nz;
    for (std::size_t pr = 0; pr < pairs; ++pr)
        for (std::size_t x = 0; x < L.nx; ++x) {
            const double px = L.px_v12[pr * L.nx + x];
            if (px == 0.0) continue;
            for (std::size_t y1 = 0; y1 < L.ny1; ++y1)
                for (std::size_t y2 = 0; y2 < L.ny2; ++y2)
                    for (std::size_t z = 0; z < L.nz; ++z) {
                        const double p = px * L.channel[x * width + (y1 * L.ny2 + y2) * L.nz + z];
                        L.py1_v12[pr * L.ny1 + y1] += p;
                        L.py2_v12[pr * L.ny2 + y2] += p;
                    }
        }
    L.pz_v12 = eavesdropper_law(L, j.channel());
    return L;
}

std::vector<double> eavesdropper_law(const SchemeLaws& L, const FactorTable& channel) {
    const std::size_t width = channel.row_width();
    if (channel.rows() != L.nx || channel.child_sizes.size() != 3)
        throw SimulationError("channel shape does not match the codebook's input alphabet");
    const std::size_t nz = channel.child_sizes[2];
    const std::size_t pairs = L.nv1 * L.nv2;
    std::vector<double> out(pairs * nz, 0.0);
    for (std::size_t pr = 0; pr < pairs; ++pr)
        for (std::size_t x = 0; x < L.nx; ++x) {
            const double px = L.px_v12[pr * L.nx + x];
            if (px == 0.0) continue;
            for (std::size_t k = 0; k < width; ++k) out[pr * nz + k % nz] += px * channel.at(x, k);
        }
    return out;
}

std::span<const std::uint16_t> Codebook::u_word(std::size_t k) const {
    return std::span<const std::uint16_t>(u).subspan(k * n, n);
}
std::span<const std::uint16_t> Codebook::v_word(std::size_t idx) const {
    return std::span<const std::uint16_t>(v).subspan(idx * n, n);
}
std::span<const std::uint16_t> Codebook::v1_word(std::size_t idx) const {
    return std::span<const std::uint16_t>(v1).subspan(idx * n, n);
}
std::span<const std::uint16_t> Codebook::v2_word(std::size_t idx) const {
    return std::span<const std::uint16_t>(v2).subspan(idx * n, n);
}

namespace {

double uniform01(Rng& rng) { return double(rng() >> 11) * 0x1.0p-53; }

std::size_t draw(Rng& rng, std::span<const double> row) {
    const double r = uniform01(rng);
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t k = 0; k < row.size(); ++k) {
        if (row[k] <= 0.0) continue;
        acc += row[k];
        last = k;
        if (r < acc) return k;
    }
    return last;
}

std::size_t uniform_index(Rng& rng, std::size_t n) { return n <= 1 ? 0 : std::size_t(rng() % n); }

std::size_t v1_words(const SchemeConfig& c) {
    return c.v_words() * c.sizes.N1d * c.sizes.ND1 * c.sizes.NL1;
}
std::size_t v2_words(const SchemeConfig& c) {
    return c.v_words() * c.sizes.N2d * c.sizes.ND2 * c.sizes.NL2;
}

std::size_t v_index(const SchemeConfig& c, std::size_t k, std::size_t kb, std::size_t m1c,
                    std::size_t m2c, std::size_t d) {
    const auto& s = c.sizes;
    return (((k * s.Nb + kb) * s.N1c + m1c) * s.N2c + m2c) * s.ND + d;
}

std::size_t private_index(std::size_t vidx, std::size_t md, std::size_t Nd, std::size_t di,
                          std::size_t NDi, std::size_t li, std::size_t NLi) {
    return ((vidx * Nd + md) * NDi + di) * NLi + li;
}

void check_message(const SchemeConfig& c, int i, const Message& m) {
    const std::size_t Nc = i == 1 ? c.sizes.N1c : c.sizes.N2c;
    const std::size_t Nd = i == 1 ? c.sizes.N1d : c.sizes.N2d;
    if (m.a >= c.sizes.Na || m.b >= c.sizes.Nb || m.c >= Nc || m.d >= Nd)
        throw SimulationError("message segment out of range");
}

void check_alphabets(const SchemeLaws& L) {
    constexpr std::size_t lim = std::numeric_limits<std::uint16_t>::max();
    for (std::size_t s : {L.nu, L.nv, L.nv1, L.nv2, L.nx, L.ny1, L.ny2, L.nz})
        if (s > lim) throw SimulationError("alphabet too large for the codeword symbol type");
}

// Reusable count buffer for the typicality test.
class TypicalityTest {
public:
    bool check(std::size_t n, std::size_t a_size, std::size_t b_size, std::span<const double> cond,
               double delta) {
        const double inv = 1.0 / double(n);
        double l1 = 0.0;
        for (std::size_t a = 0; a < a_size; ++a) {
            if (marg_[a] == 0) continue;
            const double pa = double(marg_[a]) * inv;
            for (std::size_t b = 0; b < b_size; ++b) {
                const std::size_t cnt = joint_[a * b_size + b];
                const double p = cond[a * b_size + b];
                if (cnt > 0 && p == 0.0) return false;
                l1 += std::abs(double(cnt) * inv - pa * p);
            }
        }
        return l1 <= delta;
    }

    void reset(std::size_t a_size, std::size_t b_size) {
        joint_.assign(a_size * b_size, 0);
        marg_.assign(a_size, 0);
    }
    void add(std::size_t a, std::size_t b, std::size_t b_size) {
        ++joint_[a * b_size + b];
        ++marg_[a];
    }

private:
    std::vector<std::size_t> joint_;
    std::vector<std::size_t> marg_;
};

// (v1,v2) pair symbols against y_i, or v against the (v1,v2) pair for the Marton step.
bool pair_typical(TypicalityTest& t, std::span<const std::uint16_t> w1,
                  std::span<const std::uint16_t> w2, std::span<const std::uint16_t> y,
                  const SchemeLaws& L, std::size_t ny, std::span<const double> cond, double delta) {
    t.reset(L.nv1 * L.nv2, ny);
    for (std::size_t k = 0; k < y.size(); ++k) t.add(std::size_t(w1[k]) * L.nv2 + w2[k], y[k], ny);
    return t.check(y.size(), L.nv1 * L.nv2, ny, cond, delta);
}

bool marton_typical(TypicalityTest& t, std::span<const std::uint16_t> v,
                    std::span<const std::uint16_t> w1, std::span<const std::uint16_t> w2,
                    const SchemeLaws& L, double delta) {
    const std::size_t pairs = L.nv1 * L.nv2;
    t.reset(L.nv, pairs);
    for (std::size_t k = 0; k < v.size(); ++k) t.add(v[k], std::size_t(w1[k]) * L.nv2 + w2[k], pairs);
    return t.check(v.size(), L.nv, pairs, L.pv12_v, delta);
}

// Marton search over the bins of one (v, own private, other private) context.
std::pair<std::size_t, std::size_t> marton_search(TypicalityTest& t, const Codebook& cb,
                                                  const SchemeConfig& c, std::size_t vidx,
                                                  std::size_t base1, std::size_t base2,
                                                  bool& failed) {
    const auto vw = cb.v_word(vidx);
    for (std::size_t l1 = 0; l1 < c.sizes.NL1; ++l1)
        for (std::size_t l2 = 0; l2 < c.sizes.NL2; ++l2)
            if (marton_typical(t, vw, cb.v1_word(base1 + l1), cb.v2_word(base2 + l2), cb.laws,
                               c.delta)) {
                failed = false;
                return {l1, l2};
            }
    failed = true;
    return {0, 0};
}

EncodedIndices encode_with(TypicalityTest& t, const Codebook& cb, const SchemeConfig& c,
                           const Message& m1, const Message& m2, const Randomness& r) {
    const auto& s = c.sizes;
    EncodedIndices e;
    e.v = v_index(c, pad(m1.a, m2.a, s.Na), pad(m1.b, m2.b, s.Nb), m1.c, m2.c, r.d);
    const std::size_t base1 = private_index(e.v, m1.d, s.N1d, r.d1, s.ND1, 0, s.NL1);
    const std::size_t base2 = private_index(e.v, m2.d, s.N2d, r.d2, s.ND2, 0, s.NL2);
    const auto [l1, l2] = marton_search(t, cb, c, e.v, base1, base2, e.marton_failed);
    e.l1 = l1;
    e.l2 = l2;
    e.v1 = base1 + l1;
    e.v2 = base2 + l2;
    return e;
}

void check_randomness(const SchemeConfig& c, const Randomness& r) {
    if (r.d >= c.sizes.ND || r.d1 >= c.sizes.ND1 || r.d2 >= c.sizes.ND2)
        throw SimulationError("randomness index out of range");
}

}  // namespace

Codebook generate_codebooks(const SchemeConfig& config, const JointDistribution& j,
                            std::uint64_t seed) {
    config.validate();
    Codebook cb;
    cb.n = config.n;
    cb.seed = seed;
    cb.laws = scheme_laws(j);
    check_alphabets(cb.laws);
    const auto& L = cb.laws;
    const std::size_t n = config.n;
    const std::size_t nvw = config.v_words();
    const std::size_t n1 = v1_words(config);
    const std::size_t n2 = v2_words(config);
    const double symbols = double(n) * double(config.sizes.Na + nvw + n1 + n2);
    if (symbols > double(config.caps.codebook))
        throw SimulationError("codebook size exceeds cap (" + std::to_string(config.caps.codebook) +
                              " symbols)");

    Rng rng(seed);
    cb.u.resize(config.sizes.Na * n);
    for (auto& sym : cb.u) sym = std::uint16_t(draw(rng, L.pu));

    const std::size_t per_k = nvw / config.sizes.Na;
    cb.v.resize(nvw * n);
    for (std::size_t w = 0; w < nvw; ++w) {
        const auto uw = cb.u_word(w / per_k);
        for (std::size_t t = 0; t < n; ++t)
            cb.v[w * n + t] = std::uint16_t(
                draw(rng, std::span<const double>(L.pv_u).subspan(uw[t] * L.nv, L.nv)));
    }

    auto layer = [&](std::vector<std::uint16_t>& out, std::size_t words,
                     const std::vector<double>& cond, std::size_t width) {
        const std::size_t per_v = words / nvw;
        out.resize(words * n);
        for (std::size_t w = 0; w < words; ++w) {
            const auto vw = cb.v_word(w / per_v);
            for (std::size_t t = 0; t < n; ++t)
                out[w * n + t] = std::uint16_t(
                    draw(rng, std::span<const double>(cond).subspan(vw[t] * width, width)));
        }
    };
    layer(cb.v1, n1, L.pv1_v, L.nv1);
    layer(cb.v2, n2, L.pv2_v, L.nv2);
    return cb;
}

EncodedIndices encode_indices(const Codebook& cb, const SchemeConfig& config, const Message& m1,
                              const Message& m2, const Randomness& r) {
    check_message(config, 1, m1);
    check_message(config, 2, m2);
    check_randomness(config, r);
    TypicalityTest t;
    return encode_with(t, cb, config, m1, m2, r);
}

Encoded encode(const Codebook& cb, const SchemeConfig& config, const Message& m1,
               const Message& m2, const Randomness& r, Rng& rng) {
    Encoded e;
    e.indices = encode_indices(cb, config, m1, m2, r);
    const auto& L = cb.laws;
    const auto w1 = cb.v1_word(e.indices.v1);
    const auto w2 = cb.v2_word(e.indices.v2);
    e.x.resize(cb.n);
    for (std::size_t t = 0; t < cb.n; ++t) {
        const std::size_t pr = std::size_t(w1[t]) * L.nv2 + w2[t];
        e.x[t] = std::uint16_t(draw(rng, std::span<const double>(L.px_v12).subspan(pr * L.nx, L.nx)));
    }
    return e;
}

bool conditionally_typical(std::span<const std::size_t> a, std::span<const std::size_t> b,
                           std::size_t a_size, std::size_t b_size, std::span<const double> cond,
                           double delta) {
    if (a.size() != b.size() || a.empty()) throw SimulationError("sequence lengths differ or are zero");
    if (cond.size() != a_size * b_size) throw SimulationError("conditional table has the wrong size");
    TypicalityTest t;
    t.reset(a_size, b_size);
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] >= a_size || b[k] >= b_size) throw SimulationError("symbol out of range");
        t.add(a[k], b[k], b_size);
    }
    return t.check(a.size(), a_size, b_size, cond, delta);
}

Decoded decode(const Codebook& cb, const SchemeConfig& config, int i,
               std::span<const std::uint16_t> y, const std::optional<Message>& side) {
    if (i != 1 && i != 2) throw SimulationError("receiver index must be 1 or 2");
    if (y.size() != cb.n) throw SimulationError("received word has the wrong length");
    const int o = 3 - i;
    if (side) check_message(config, o, *side);
    const auto& s = config.sizes;
    const auto& L = cb.laws;
    const std::size_t ny = i == 1 ? L.ny1 : L.ny2;
    const auto& cond = i == 1 ? L.py1_v12 : L.py2_v12;

    const std::size_t own_c = i == 1 ? s.N1c : s.N2c, own_d = i == 1 ? s.N1d : s.N2d;
    const std::size_t oth_c = i == 1 ? s.N2c : s.N1c, oth_d = i == 1 ? s.N2d : s.N1d;
    const std::size_t own_D = i == 1 ? s.ND1 : s.ND2, own_L = i == 1 ? s.NL1 : s.NL2;
    const std::size_t oth_D = i == 1 ? s.ND2 : s.ND1, oth_L = i == 1 ? s.NL2 : s.NL1;

    const std::size_t other_msgs = side ? 1 : config.messages(o);
    const double space = double(config.messages(i)) * double(other_msgs) * double(s.ND) *
                         double(own_D * own_L) * double(oth_D * oth_L);
    if (space > double(config.caps.decoder))
        throw SimulationError("decoder search space exceeds cap (" +
                              std::to_string(config.caps.decoder) + " candidates)");

    TypicalityTest t;
    Decoded out;
    std::optional<Message> found;
    bool ambiguous = false;
    for (std::size_t om = 0; om < other_msgs; ++om) {
        Message other;
        if (side) {
            other = *side;
        } else {
            std::size_t rest = om;
            other.d = rest % oth_d, rest /= oth_d;
            other.c = rest % oth_c, rest /= oth_c;
            other.b = rest % s.Nb, rest /= s.Nb;
            other.a = rest;
        }
        for (std::size_t ma = 0; ma < s.Na; ++ma)
            for (std::size_t mb = 0; mb < s.Nb; ++mb)
                for (std::size_t mc = 0; mc < own_c; ++mc)
                    for (std::size_t d = 0; d < s.ND; ++d) {
                        const std::size_t k = pad(ma, other.a, s.Na);
                        const std::size_t kb = pad(mb, other.b, s.Nb);
                        const std::size_t vidx = i == 1 ? v_index(config, k, kb, mc, other.c, d)
                                                        : v_index(config, k, kb, other.c, mc, d);
                        for (std::size_t od = 0; od < oth_D; ++od)
                            for (std::size_t ol = 0; ol < oth_L; ++ol) {
                                const std::size_t oidx =
                                    private_index(vidx, other.d, oth_d, od, oth_D, ol, oth_L);
                                for (std::size_t md = 0; md < own_d; ++md)
                                    for (std::size_t dd = 0; dd < own_D; ++dd)
                                        for (std::size_t l = 0; l < own_L; ++l) {
                                            const std::size_t idx =
                                                private_index(vidx, md, own_d, dd, own_D, l, own_L);
                                            const auto w1 = i == 1 ? cb.v1_word(idx) : cb.v1_word(oidx);
                                            const auto w2 = i == 1 ? cb.v2_word(oidx) : cb.v2_word(idx);
                                            if (!pair_typical(t, w1, w2, y, L, ny, cond, config.delta))
                                                continue;
                                            ++out.candidates;
                                            const Message m{ma, mb, mc, md};
                                            if (!found) {
                                                found = m;
                                            } else if (*found != m) {
                                                ambiguous = true;
                                            }
                                        }
                            }
                    }
    }
    if (found && !ambiguous) out.message = found;
    return out;
}

std::size_t message_index(const SchemeConfig& c, int i, const Message& m) {
    check_message(c, i, m);
    const std::size_t Nc = i == 1 ? c.sizes.N1c : c.sizes.N2c;
    const std::size_t Nd = i == 1 ? c.sizes.N1d : c.sizes.N2d;
    return ((m.a * c.sizes.Nb + m.b) * Nc + m.c) * Nd + m.d;
}

Message message_at(const SchemeConfig& c, int i, std::size_t index) {
    if (index >= c.messages(i)) throw SimulationError("message index out of range");
    const std::size_t Nc = i == 1 ? c.sizes.N1c : c.sizes.N2c;
    const std::size_t Nd = i == 1 ? c.sizes.N1d : c.sizes.N2d;
    Message m;
    m.d = index % Nd, index /= Nd;
    m.c = index % Nc, index /= Nc;
    m.b = index % c.sizes.Nb, index /= c.sizes.Nb;
    m.a = index;
    return m;
}

namespace {

struct LeakageTables {
    std::array<std::vector<double>, 2> per_message;  // [m][z^n], summed
    std::size_t zn = 1;
    std::size_t tuples = 0;
    std::size_t failures = 0;
};

LeakageTables enumerate_leakage(const Codebook& cb, const SchemeConfig& c,
                                std::span<const double> pz) {
    c.validate();
    const auto& L = cb.laws;
    const std::size_t pairs = L.nv1 * L.nv2;
    if (pz.empty() || pz.size() % pairs != 0)
        throw SimulationError("eavesdropper law does not match the codebook's auxiliaries");
    const std::size_t nz = pz.size() / pairs;
    const auto& s = c.sizes;
    const std::size_t M1 = c.messages(1), M2 = c.messages(2);
    const double tuples = double(M1) * double(M2) * double(s.ND * s.ND1 * s.ND2);
    const double zn_d = std::pow(double(nz), double(cb.n));
    if (tuples * zn_d > double(c.caps.leakage))
        throw SimulationError("leakage enumeration exceeds cap (" + std::to_string(c.caps.leakage) +
                              " tuple-outputs)");

    LeakageTables T;
    T.zn = std::size_t(zn_d);
    T.per_message[0].assign(M1 * T.zn, 0.0);
    T.per_message[1].assign(M2 * T.zn, 0.0);
    TypicalityTest t;
    std::vector<double> cur, next;
    cur.reserve(T.zn);
    next.reserve(T.zn);
    for (std::size_t i1 = 0; i1 < M1; ++i1) {
        const Message m1 = message_at(c, 1, i1);
        for (std::size_t i2 = 0; i2 < M2; ++i2) {
            const Message m2 = message_at(c, 2, i2);
            for (std::size_t d = 0; d < s.ND; ++d)
                for (std::size_t d1 = 0; d1 < s.ND1; ++d1)
                    for (std::size_t d2 = 0; d2 < s.ND2; ++d2) {
                        const auto e = encode_with(t, cb, c, m1, m2, Randomness{d, d1, d2});
                        ++T.tuples;
                        if (e.marton_failed) ++T.failures;
                        const auto w1 = cb.v1_word(e.v1);
                        const auto w2 = cb.v2_word(e.v2);
                        cur.assign(1, 1.0);
                        for (std::size_t k = 0; k < cb.n; ++k) {
                            const double* row = pz.data() + (std::size_t(w1[k]) * L.nv2 + w2[k]) * nz;
                            next.resize(cur.size() * nz);
                            for (std::size_t a = 0; a < cur.size(); ++a)
                                for (std::size_t z = 0; z < nz; ++z) next[a * nz + z] = cur[a] * row[z];
                            std::swap(cur, next);
                        }
                        double* acc1 = T.per_message[0].data() + i1 * T.zn;
                        double* acc2 = T.per_message[1].data() + i2 * T.zn;
                        for (std::size_t z = 0; z < T.zn; ++z) {
                            acc1[z] += cur[z];
                            acc2[z] += cur[z];
                        }
                    }
        }
    }
    return T;
}

// I(M;Z^n) in bits from unnormalized per-message output laws with equal mass.
double mutual_information(const std::vector<double>& per_message, std::size_t zn) {
    const std::size_t M = per_message.size() / zn;
    std::vector<double> avg(zn, 0.0);
    double mass = 0.0;
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t z = 0; z < zn; ++z) avg[z] += per_message[m * zn + z];
    for (double v : avg) mass += v;
    if (mass <= 0.0) return 0.0;
    const double row_mass = mass / double(M);
    double info = 0.0;
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t z = 0; z < zn; ++z) {
            const double p = per_message[m * zn + z] / row_mass;
            if (p <= 0.0) continue;
            const double q = avg[z] / mass;
            info += p * std::log2(p / q);
        }
    return std::max(0.0, info / double(M));
}

}  // namespace

double exact_leakage(const Codebook& cb, const SchemeConfig& config, std::span<const double> pz_v12,
                     int i) {
    if (i != 1 && i != 2) throw SimulationError("receiver index must be 1 or 2");
    const auto T = enumerate_leakage(cb, config, pz_v12);
    return mutual_information(T.per_message[std::size_t(i - 1)], T.zn) / double(cb.n);
}

double exact_leakage(const Codebook& cb, const SchemeConfig& config, const FactorTable& channel,
                     int i) {
    return exact_leakage(cb, config, eavesdropper_law(cb.laws, channel), i);
}

LeakageSummary exact_leakage_both(const Codebook& cb, const SchemeConfig& config,
                                  std::span<const double> pz_v12) {
    const auto T = enumerate_leakage(cb, config, pz_v12);
    LeakageSummary s;
    for (std::size_t k = 0; k < 2; ++k)
        s.bits_per_symbol[k] = mutual_information(T.per_message[k], T.zn) / double(cb.n);
    s.encoding_failure_rate = T.tuples ? double(T.failures) / double(T.tuples) : 0.0;
    return s;
}

Interval wilson_interval(std::size_t errors, std::size_t trials) {
    if (trials == 0) return {0.0, 0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double n = double(trials);
    const double p = double(errors) / n;
    const double denom = 1.0 + z * z / n;
    const double centre = (p + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    return {p, std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

namespace {

struct CodebookOutcome {
    std::uint64_t seed = 0;
    std::array<double, 2> leakage{};
    double failure_rate = 0.0;
    std::array<std::size_t, 2> errors{};
    std::size_t mc_failures = 0;
};

constexpr std::uint64_t kTrialStream = 0x7472616C73ull;

CodebookOutcome run_codebook(const SchemeConfig& c, const JointDistribution& j,
                             const ExperimentOptions& opt, std::uint64_t seed) {
    CodebookOutcome out;
    out.seed = seed;
    const Codebook cb = generate_codebooks(c, j, seed);
    if (opt.compute_leakage) {
        const auto s = exact_leakage_both(cb, c, cb.laws.pz_v12);
        out.leakage = s.bits_per_symbol;
        out.failure_rate = s.encoding_failure_rate;
    }
    const auto& L = cb.laws;
    const std::size_t width = L.ny1 * L.ny2 * L.nz;
    Rng rng(derive_seed(seed, kTrialStream));
    std::vector<std::uint16_t> y1(c.n), y2(c.n);
    for (std::size_t trial = 0; trial < opt.trials; ++trial) {
        const Message m1 = message_at(c, 1, uniform_index(rng, c.messages(1)));
        const Message m2 = message_at(c, 2, uniform_index(rng, c.messages(2)));
        const Randomness r{uniform_index(rng, c.sizes.ND), uniform_index(rng, c.sizes.ND1),
                           uniform_index(rng, c.sizes.ND2)};
        const Encoded e = encode(cb, c, m1, m2, r, rng);
        if (e.indices.marton_failed) ++out.mc_failures;
        for (std::size_t t = 0; t < c.n; ++t) {
            const std::size_t k = draw(
                rng, std::span<const double>(L.channel).subspan(e.x[t] * width, width));
            y1[t] = std::uint16_t(k / (L.ny2 * L.nz));
            y2[t] = std::uint16_t((k / L.nz) % L.ny2);
        }
        const auto side1 = opt.side_information ? std::optional<Message>(m2) : std::nullopt;
        const auto side2 = opt.side_information ? std::optional<Message>(m1) : std::nullopt;
        if (decode(cb, c, 1, y1, side1).message != std::optional<Message>(m1)) ++out.errors[0];
        if (decode(cb, c, 2, y2, side2).message != std::optional<Message>(m2)) ++out.errors[1];
    }
    return out;
}

}  // namespace

ExperimentReport run_experiment(const SchemeConfig& config, const JointDistribution& j,
                                const ExperimentOptions& options) {
    config.validate();
    ExperimentReport rep;
    rep.config = config;
    rep.options = options;
    std::vector<std::future<CodebookOutcome>> jobs;
    for (std::size_t c = 0; c < options.codebooks; ++c) {
        const auto seed = derive_seed(config.master_seed, c);
        rep.codebook_seeds.push_back(seed);
        jobs.push_back(std::async(std::launch::async, run_codebook, std::cref(config), std::cref(j),
                                  std::cref(options), seed));
    }
    double failure_sum = 0.0;
    for (auto& job : jobs) {
        const CodebookOutcome o = job.get();
        for (std::size_t k = 0; k < 2; ++k) {
            rep.errors[k] += o.errors[k];
            if (options.compute_leakage) rep.leakage[k].push_back(o.leakage[k]);
        }
        failure_sum += o.failure_rate;
        rep.mc_encoding_failures += o.mc_failures;
    }
    rep.transmissions = options.codebooks * options.trials;
    for (std::size_t k = 0; k < 2; ++k) {
        rep.error[k] = wilson_interval(rep.errors[k], rep.transmissions);
        const auto& l = rep.leakage[k];
        if (!l.empty()) {
            double sum = 0.0;
            for (double v : l) sum += v;
            rep.leakage_mean[k] = sum / double(l.size());
            rep.leakage_max[k] = *std::max_element(l.begin(), l.end());
        }
    }
    if (options.compute_leakage && options.codebooks > 0)
        rep.encoding_failure_rate = failure_sum / double(options.codebooks);
    return rep;
}

double round12(double x) {
    if (!std::isfinite(x) || x == 0.0) return x;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::strtod(buf, nullptr);
}

namespace {

constexpr const char* kSizeNames[] = {"Na", "Nb", "N1c", "N2c", "N1d", "N2d",
                                      "ND", "ND1", "ND2", "NL1", "NL2"};
constexpr const char* kRateNames[] = {"Ra", "Rb", "R1c", "R2c", "R1d", "R2d",
                                      "RD", "RD1", "RD2", "RL1", "RL2"};

std::array<std::size_t*, 11> size_fields(SegmentSizes& s) {
    return {&s.Na, &s.Nb, &s.N1c, &s.N2c, &s.N1d, &s.N2d, &s.ND, &s.ND1, &s.ND2, &s.NL1, &s.NL2};
}
std::array<double*, 11> rate_fields(SchemeRates& r) {
    return {&r.Ra, &r.Rb, &r.R1c, &r.R2c, &r.R1d, &r.R2d, &r.RD, &r.RD1, &r.RD2, &r.RL1, &r.RL2};
}

void reject_unknown(const json& node, std::initializer_list<std::string_view> known,
                    std::string_view where) {
    for (const auto& [key, value] : node.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw SimulationError("unknown key '" + key + "' in " + std::string(where));
}

}  // namespace

SchemeConfig config_from_json(const json& doc) {
    if (!doc.is_object()) throw SimulationError("simulation config must be an object");
    SchemeConfig c;
    c.n = doc.at("n").get<std::size_t>();
    c.variant = parse_variant(doc.value("variant", "simplified2"));
    c.delta = doc.value("delta", c.delta);
    if (doc.contains("sizes")) {
        const auto& node = doc.at("sizes");
        auto fields = size_fields(c.sizes);
        for (std::size_t k = 0; k < fields.size(); ++k)
            *fields[k] = node.value(kSizeNames[k], std::size_t(1));
        for (const auto& [key, v] : node.items())
            if (std::find_if(std::begin(kSizeNames), std::end(kSizeNames),
                             [&](const char* s) { return key == s; }) == std::end(kSizeNames))
                throw SimulationError("unknown size '" + key + "'");
    }
    if (doc.contains("rates")) {
        const auto& node = doc.at("rates");
        SchemeRates r;
        auto fields = rate_fields(r);
        for (std::size_t k = 0; k < fields.size(); ++k) *fields[k] = node.value(kRateNames[k], 0.0);
        for (const auto& [key, v] : node.items())
            if (std::find_if(std::begin(kRateNames), std::end(kRateNames),
                             [&](const char* s) { return key == s; }) == std::end(kRateNames))
                throw SimulationError("unknown rate '" + key + "'");
        const SegmentSizes derived = sizes_from_rates(r, c.n);
        if (doc.contains("sizes")) {
            SegmentSizes given = c.sizes;
            auto a = size_fields(given);
            SegmentSizes want = derived;
            auto b = size_fields(want);
            for (std::size_t k = 0; k < a.size(); ++k)
                if (*a[k] != *b[k])
                    throw SimulationError(std::string("size ") + kSizeNames[k] +
                                          " disagrees with the rates at this blocklength");
        }
        c.rates = r;
        c.sizes = derived;
    }
    if (doc.contains("caps")) {
        const auto& caps = doc.at("caps");
        reject_unknown(caps, {"leakage", "decoder", "codebook"}, "caps");
        c.caps.leakage = caps.value("leakage", c.caps.leakage);
        c.caps.decoder = caps.value("decoder", c.caps.decoder);
        c.caps.codebook = caps.value("codebook", c.caps.codebook);
    }
    if (doc.contains("seeds")) c.master_seed = doc.at("seeds").value("master", c.master_seed);
    c.channel = doc.value("channel", "");
    c.validate();
    return c;
}

ExperimentOptions options_from_json(const json& doc) {
    ExperimentOptions o;
    o.codebooks = doc.value("codebooks", o.codebooks);
    o.trials = doc.value("trials", o.trials);
    o.side_information = doc.value("side_information", o.side_information);
    o.compute_leakage = doc.value("leakage", o.compute_leakage);
    return o;
}

json config_to_json(const SchemeConfig& c) {
    json out;
    out["n"] = c.n;
    out["variant"] = std::string(variant_name(c.variant));
    out["delta"] = round12(c.delta);
    SegmentSizes s = c.sizes;
    auto fields = size_fields(s);
    json sizes;
    for (std::size_t k = 0; k < fields.size(); ++k) sizes[kSizeNames[k]] = *fields[k];
    out["sizes"] = sizes;
    if (c.rates) {
        SchemeRates r = *c.rates;
        auto rf = rate_fields(r);
        json rates;
        for (std::size_t k = 0; k < rf.size(); ++k) rates[kRateNames[k]] = round12(*rf[k]);
        out["rates"] = rates;
    }
    out["caps"] = {{"leakage", c.caps.leakage}, {"decoder", c.caps.decoder}, {"codebook", c.caps.codebook}};
    out["seeds"] = {{"master", c.master_seed}};
    out["channel"] = c.channel;
    return out;
}

json report_to_json(const ExperimentReport& r) {
    json out;
    out["config"] = config_to_json(r.config);
    out["options"] = {{"codebooks", r.options.codebooks},
                      {"trials", r.options.trials},
                      {"side_information", r.options.side_information},
                      {"leakage", r.options.compute_leakage}};
    json receivers = json::array();
    for (std::size_t k = 0; k < 2; ++k) {
        json rec;
        rec["receiver"] = k + 1;
        rec["messages"] = r.config.messages(int(k + 1));
        rec["errors"] = r.errors[k];
        rec["error_probability"] = round12(r.error[k].estimate);
        rec["error_ci95"] = {round12(r.error[k].lo), round12(r.error[k].hi)};
        json per = json::array();
        for (double v : r.leakage[k]) per.push_back(round12(v));
        rec["leakage_bits_per_symbol"] = per;
        rec["leakage_mean"] = round12(r.leakage_mean[k]);
        rec["leakage_max"] = round12(r.leakage_max[k]);
        receivers.push_back(rec);
    }
    out["receivers"] = receivers;
    out["transmissions"] = r.transmissions;
    out["encoding_failure_rate"] = round12(r.encoding_failure_rate);
    out["mc_encoding_failures"] = r.mc_encoding_failures;
    out["codebook_seeds"] = r.codebook_seeds;
    return out;
}

}  // namespace bcsec
