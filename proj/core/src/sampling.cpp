#include "bcsec/sampling.hpp"

#include <cmath>

namespace bcsec {

namespace {

std::vector<double> dirichlet_rows(Rng& rng, std::size_t rows, std::size_t width,
                                   double concentration = 1.0) {
    std::gamma_distribution<double> gamma(concentration, 1.0);
    std::vector<double> out(rows * width);
    for (std::size_t r = 0; r < rows; ++r) {
        double sum = 0.0;
        while (sum <= 0.0) {
            sum = 0.0;
            for (std::size_t c = 0; c < width; ++c) {
                out[r * width + c] = gamma(rng);
                sum += out[r * width + c];
            }
        }
        for (std::size_t c = 0; c < width; ++c) out[r * width + c] /= sum;
    }
    return out;
}

constexpr double kSparse = 0.3;

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t task) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (task + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

JointDistribution random_joint(Rng& rng, std::size_t n, std::size_t q) {
    std::vector<FactorTable> fs;
    fs.push_back(make_factor({Var::U}, {n}, {}, {}, dirichlet_rows(rng, 1, n)));
    fs.push_back(make_factor({Var::V}, {n}, {Var::U}, {n}, dirichlet_rows(rng, n, n)));
    fs.push_back(make_factor({Var::V1, Var::V2}, {n, n}, {Var::V}, {n}, dirichlet_rows(rng, n, n * n)));
    fs.push_back(make_factor({Var::X}, {q}, {Var::V1, Var::V2}, {n, n}, dirichlet_rows(rng, n * n, q)));
    fs.push_back(make_factor({Var::Y1, Var::Y2, Var::Z}, {q, q, q}, {Var::X}, {q},
                             dirichlet_rows(rng, q, q * q * q)));
    return build_joint(std::move(fs));
}

std::vector<double> symmetric_channel(std::size_t q, double p) {
    std::vector<double> w(q * q, q > 1 ? p / double(q - 1) : 0.0);
    for (std::size_t x = 0; x < q; ++x) w[x * q + x] = q > 1 ? 1.0 - p : 1.0;
    return w;
}

FactorTable product_channel(std::size_t q, const std::vector<double>& y1,
                            const std::vector<double>& y2, const std::vector<double>& z) {
    std::vector<double> probs(q * q * q * q);
    for (std::size_t x = 0; x < q; ++x)
        for (std::size_t a = 0; a < q; ++a)
            for (std::size_t b = 0; b < q; ++b)
                for (std::size_t c = 0; c < q; ++c)
                    probs[((x * q + a) * q + b) * q + c] = y1[x * q + a] * y2[x * q + b] * z[x * q + c];
    return make_factor({Var::Y1, Var::Y2, Var::Z}, {q, q, q}, {Var::X}, {q}, std::move(probs));
}

JointDistribution gated_joint(Rng& rng, GatedFamily family) {
    const std::size_t n = family.alphabet;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const bool copy_v2 = unif(rng) < 0.5;

    // private auxiliary drawn from p(v_i|v); the other one copies V
    const auto keep = dirichlet_rows(rng, n, n, kSparse);
    std::vector<double> pvv(n * n * n, 0.0);
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t a = copy_v2 ? k : v;
            const std::size_t b = copy_v2 ? v : k;
            pvv[(v * n + a) * n + b] = keep[v * n + k];
        }

    // legitimate crossovers well below the eavesdropper's
    const bool ternary = n >= 3;
    const double leg_hi = ternary ? 0.25 : 0.2;
    const double eve_lo = ternary ? 0.4 : 0.25;
    const double eve_hi = ternary ? 0.6 : 0.45;
    const double p1 = leg_hi * unif(rng);
    const double p2 = leg_hi * unif(rng);
    const double pz = eve_lo + (eve_hi - eve_lo) * unif(rng);

    std::vector<FactorTable> fs;
    fs.push_back(make_factor({Var::U}, {n}, {}, {}, dirichlet_rows(rng, 1, n)));
    fs.push_back(make_factor({Var::V}, {n}, {Var::U}, {n}, dirichlet_rows(rng, n, n, kSparse)));
    fs.push_back(make_factor({Var::V1, Var::V2}, {n, n}, {Var::V}, {n}, std::move(pvv)));
    fs.push_back(make_factor({Var::X}, {n}, {Var::V1, Var::V2}, {n, n},
                             dirichlet_rows(rng, n * n, n, kSparse)));
    fs.push_back(product_channel(n, symmetric_channel(n, p1), symmetric_channel(n, p2),
                                 symmetric_channel(n, pz)));
    return build_joint(std::move(fs));
}

}  // namespace bcsec
