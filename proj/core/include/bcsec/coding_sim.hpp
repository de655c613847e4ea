#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bcsec/probability.hpp"
#include "bcsec/sampling.hpp"

namespace bcsec {

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Variant { original, simplified1, simplified2 };
std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view s);

/// Index-set sizes: N = 2^{nR} rounded by the caller.
struct SegmentSizes {
    std::size_t Na = 1, Nb = 1;
    std::size_t N1c = 1, N2c = 1;
    std::size_t N1d = 1, N2d = 1;
    std::size_t ND = 1, ND1 = 1, ND2 = 1;
    std::size_t NL1 = 1, NL2 = 1;
};

/// Rates in bits/symbol; a size is max(1, round(2^{nR})).
struct SchemeRates {
    double Ra = 0, Rb = 0, R1c = 0, R2c = 0, R1d = 0, R2d = 0;
    double RD = 0, RD1 = 0, RD2 = 0, RL1 = 0, RL2 = 0;
};

SegmentSizes sizes_from_rates(const SchemeRates& rates, std::size_t n);

struct SimCaps {
    std::uint64_t leakage = std::uint64_t(1) << 26;  ///< |Z|^n times enumerated tuples
    std::uint64_t decoder = std::uint64_t(1) << 22;  ///< candidates per decoding call
    std::uint64_t codebook = std::uint64_t(1) << 24; ///< stored symbols
};

struct SchemeConfig {
    std::size_t n = 4;
    SegmentSizes sizes;
    /// Set when the sizes were derived from rates; echoed for reproduction.
    std::optional<SchemeRates> rates;
    Variant variant = Variant::simplified2;
    double delta = 0.2;
    SimCaps caps;
    std::uint64_t master_seed = 1;
    /// Distribution-file reference echoed into reports; not read by the core.
    std::string channel;

    /// Throws on size/variant mismatches.
    void validate() const;
    std::size_t messages(int i) const;
    std::size_t v_words() const;
};

struct Message {
    std::size_t a = 0, b = 0, c = 0, d = 0;
    auto operator<=>(const Message&) const = default;
};

struct Randomness {
    std::size_t d = 0, d1 = 0, d2 = 0;
};

std::size_t pad(std::size_t m1a, std::size_t m2a, std::size_t Na);

/// Conditional laws the scheme needs, flattened row-major (parents first).
struct SchemeLaws {
    std::size_t nu = 0, nv = 0, nv1 = 0, nv2 = 0, nx = 0, ny1 = 0, ny2 = 0, nz = 0;
    std::vector<double> pu, pv_u, pv1_v, pv2_v;
    std::vector<double> pv12_v;   ///< p(v1,v2|v), pair index v1*nv2+v2
    std::vector<double> px_v12;   ///< p(x|v1,v2)
    std::vector<double> channel;  ///< p(y1,y2,z|x)
    std::vector<double> py1_v12, py2_v12, pz_v12;
};

SchemeLaws scheme_laws(const JointDistribution& j);
/// p(z|v1,v2) = sum_x p(x|v1,v2) p(z|x) for an arbitrary p(y1,y2,z|x) of matching shape.
std::vector<double> eavesdropper_law(const SchemeLaws& laws, const FactorTable& channel);

/// Codeword tables, one symbol per entry, row-major by index then position.
struct Codebook {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    SchemeLaws laws;
    std::vector<std::uint16_t> u;   ///< [k]
    std::vector<std::uint16_t> v;   ///< [k][kb][m1c][m2c][d]
    std::vector<std::uint16_t> v1;  ///< [v word][m1d][d1][l1]
    std::vector<std::uint16_t> v2;  ///< [v word][m2d][d2][l2]

    std::span<const std::uint16_t> u_word(std::size_t k) const;
    std::span<const std::uint16_t> v_word(std::size_t idx) const;
    std::span<const std::uint16_t> v1_word(std::size_t idx) const;
    std::span<const std::uint16_t> v2_word(std::size_t idx) const;
};

/// U^n i.i.d. p(u); V^n positionwise p(v|u_t); V_i^n positionwise from the marginal p(v_i|v_t).
Codebook generate_codebooks(const SchemeConfig& config, const JointDistribution& j,
                            std::uint64_t seed);

/// Deterministic part of encoding: codeword indices and the Marton choice.
struct EncodedIndices {
    std::size_t v = 0;   ///< v-layer word
    std::size_t v1 = 0;  ///< v1-layer word
    std::size_t v2 = 0;  ///< v2-layer word
    std::size_t l1 = 0, l2 = 0;
    bool marton_failed = false;
};

EncodedIndices encode_indices(const Codebook& cb, const SchemeConfig& config, const Message& m1,
                              const Message& m2, const Randomness& r);

struct Encoded {
    EncodedIndices indices;
    std::vector<std::uint16_t> x;
};

/// Full encoder: indices, then x^n drawn positionwise from p(x|v1,v2).
Encoded encode(const Codebook& cb, const SchemeConfig& config, const Message& m1,
               const Message& m2, const Randomness& r, Rng& rng);

/// Strong typicality of b^n given a^n: zero-probability pairs absent and the L1 distance
/// between the empirical joint and pi(a) p(b|a) at most delta.
bool conditionally_typical(std::span<const std::size_t> a, std::span<const std::size_t> b,
                           std::size_t a_size, std::size_t b_size, std::span<const double> cond,
                           double delta);

struct Decoded {
    std::optional<Message> message;  ///< empty = declared error
    std::size_t candidates = 0;      ///< typical index tuples found
};

/// Receiver i in {1,2} from y_i^n. With side information the other message is known;
/// without it its segments are searched too.
Decoded decode(const Codebook& cb, const SchemeConfig& config, int i,
               std::span<const std::uint16_t> y, const std::optional<Message>& side);

/// I(M_i;Z^n)/n in bits for the fixed codebook, by exact enumeration, with the
/// eavesdropper law p(z|v1,v2) given as rows over z.
double exact_leakage(const Codebook& cb, const SchemeConfig& config,
                     std::span<const double> pz_v12, int i);
/// Same, through the channel p(y1,y2,z|x).
double exact_leakage(const Codebook& cb, const SchemeConfig& config, const FactorTable& channel,
                     int i);

struct LeakageSummary {
    std::array<double, 2> bits_per_symbol{};
    double encoding_failure_rate = 0.0;  ///< Marton fallbacks over all enumerated tuples
};

LeakageSummary exact_leakage_both(const Codebook& cb, const SchemeConfig& config,
                                  std::span<const double> pz_v12);

/// Message and randomness index tuples, row-major in the order of their fields.
std::size_t message_index(const SchemeConfig& config, int i, const Message& m);
Message message_at(const SchemeConfig& config, int i, std::size_t index);

struct Interval {
    double estimate = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// 95% Wilson score interval.
Interval wilson_interval(std::size_t errors, std::size_t trials);

struct ExperimentOptions {
    std::size_t codebooks = 4;
    std::size_t trials = 200;  ///< Monte Carlo transmissions per codebook
    bool side_information = true;
    bool compute_leakage = true;
};

struct ExperimentReport {
    SchemeConfig config;
    ExperimentOptions options;
    std::array<Interval, 2> error;
    std::array<std::size_t, 2> errors{};
    std::size_t transmissions = 0;
    std::array<std::vector<double>, 2> leakage;  ///< per codebook, bits/symbol
    std::array<double, 2> leakage_mean{};
    std::array<double, 2> leakage_max{};
    double encoding_failure_rate = 0.0;  ///< exact, averaged over codebooks
    std::size_t mc_encoding_failures = 0;
    std::vector<std::uint64_t> codebook_seeds;
};

ExperimentReport run_experiment(const SchemeConfig& config, const JointDistribution& j,
                                const ExperimentOptions& options);

SchemeConfig config_from_json(const nlohmann::json& doc);
/// Reads "codebooks", "trials", "side_information", "leakage" from a config document.
ExperimentOptions options_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const SchemeConfig& config);
nlohmann::json report_to_json(const ExperimentReport& report);

/// Rounds to 12 significant digits for report output.
double round12(double x);

}  // namespace bcsec
