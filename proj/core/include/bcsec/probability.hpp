#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bcsec {

/// Random variables of the broadcast model, in the storage order of the joint pmf.
enum class Var : std::uint8_t { U = 0, V, V1, V2, X, Y1, Y2, Z };

inline constexpr std::size_t kNumVars = 8;
inline constexpr std::array<Var, kNumVars> kAllVars = {Var::U,  Var::V,  Var::V1, Var::V2,
                                                       Var::X,  Var::Y1, Var::Y2, Var::Z};

std::string_view var_name(Var v);
Var parse_var(std::string_view name);

/// Set of variables as a bitmask over Var.
class VarSet {
public:
    constexpr VarSet() = default;
    constexpr VarSet(std::initializer_list<Var> vars) {
        for (Var v : vars) bits_ |= bit(v);
    }
    static constexpr VarSet from_bits(std::uint8_t b) {
        VarSet s;
        s.bits_ = b;
        return s;
    }
    static constexpr VarSet all() { return from_bits(0xFF); }

    constexpr bool contains(Var v) const { return (bits_ & bit(v)) != 0; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr std::uint8_t bits() const { return bits_; }
    constexpr bool disjoint(VarSet o) const { return (bits_ & o.bits_) == 0; }
    constexpr VarSet operator|(VarSet o) const { return from_bits(bits_ | o.bits_); }
    constexpr VarSet operator&(VarSet o) const { return from_bits(bits_ & o.bits_); }
    constexpr auto operator<=>(const VarSet&) const = default;

    std::vector<Var> members() const;
    /// Comma separated, e.g. "V,V1".
    std::string to_string() const;
    static VarSet parse(std::string_view text);

private:
    static constexpr std::uint8_t bit(Var v) { return std::uint8_t(1u << std::uint8_t(v)); }
    std::uint8_t bits_ = 0;
};

class DistributionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Finite alphabet of one variable. Product alphabets keep their factor sizes and are
/// indexed row-major in the declared factor order.
struct Alphabet {
    Var label = Var::U;
    std::size_t size = 1;
    std::vector<std::size_t> factors;

    static Alphabet atomic(Var label, std::size_t size);
    static Alphabet product(Var label, std::vector<std::size_t> factors);

    bool is_product() const { return !factors.empty(); }
    std::size_t compose(std::span<const std::size_t> parts) const;
    std::vector<std::size_t> decompose(std::size_t index) const;
};

/// Conditional table p(children | parents). Entries are stored row-major with the
/// parents first, then the children, each in listed order.
struct FactorTable {
    std::vector<Var> children;
    std::vector<Var> parents;
    std::vector<std::size_t> child_sizes;
    std::vector<std::size_t> parent_sizes;
    std::vector<double> probs;

    std::size_t rows() const;
    std::size_t row_width() const;
    double at(std::size_t row, std::size_t col) const { return probs[row * row_width() + col]; }

    /// Checks entries in [0,1] and each row summing to 1 within `tol`.
    void validate(double tol = 1e-9) const;
};

inline constexpr double kProbTol = 1e-9;

struct InfoValue {
    double bits = 0.0;
};

/// Joint law of (U,V,V1,V2,X,Y1,Y2,Z) factorized as
/// p(u) p(v|u) p(v1,v2|v) p(x|v1,v2) p(y1,y2,z|x). Immutable once built.
class JointDistribution {
public:
    const Alphabet& alphabet(Var v) const { return alphabets_[std::size_t(v)]; }
    std::size_t size(Var v) const { return alphabets_[std::size_t(v)].size; }
    const std::array<FactorTable, 5>& factors() const { return factors_; }
    std::span<const double> pmf() const { return pmf_; }

    /// Probability of the full tuple, ordered as kAllVars.
    double prob(std::span<const std::size_t> tuple) const;

    /// Marginal table over `vars`, row-major in Var order of its members.
    std::vector<double> marginal(VarSet vars) const;
    double entropy(VarSet vars) const;

    /// I(A;B|C) in bits from H(A,C)+H(B,C)-H(A,B,C)-H(C). Throws on overlapping sets.
    InfoValue cond_mutual_info(VarSet a, VarSet b, VarSet c = {}) const;

    /// p(y1,y2,z|x) as a flat table (x major).
    const FactorTable& channel() const { return factors_[4]; }

    friend JointDistribution build_joint(std::vector<FactorTable> factors);
    friend JointDistribution build_joint(std::vector<FactorTable> factors,
                                         const std::array<Alphabet, kNumVars>& alphabets);

private:
    std::array<Alphabet, kNumVars> alphabets_;
    std::array<FactorTable, 5> factors_;
    std::vector<double> pmf_;
    std::array<std::size_t, kNumVars> strides_{};
};

JointDistribution build_joint(std::vector<FactorTable> factors,
                              const std::array<Alphabet, kNumVars>& alphabets);

/// Assembles the joint from the five chain factors in order
/// p(u), p(v|u), p(v1,v2|v), p(x|v1,v2), p(y1,y2,z|x).
JointDistribution build_joint(std::vector<FactorTable> factors);

/// Same as build_joint but carries product-alphabet metadata for the auxiliaries.
JointDistribution build_joint(std::vector<FactorTable> factors,
                              const std::array<Alphabet, kNumVars>& alphabets);

enum class Collapse { none, collapse1, collapse2 };

std::string_view collapse_name(Collapse c);
Collapse parse_collapse(std::string_view name);

/// Auxiliary substitution used to reach the rate axes.
/// collapse2: U'=V'=V2'=U and V1'=(V,V1); collapse1 is the mirror image.
JointDistribution substitute_aux(const JointDistribution& j, Collapse mode);

/// Time-sharing mixture: Q=alpha with probability gamma, auxiliaries become (Q,aux).
/// The channel p(y1,y2,z|x) of both inputs must agree within 1e-12.
JointDistribution timeshare_mix(const JointDistribution& alpha, const JointDistribution& beta,
                                double gamma);

// Convenience constructors for the chain factors.
FactorTable make_factor(std::vector<Var> children, std::vector<std::size_t> child_sizes,
                        std::vector<Var> parents, std::vector<std::size_t> parent_sizes,
                        std::vector<double> probs);

}  // namespace bcsec
