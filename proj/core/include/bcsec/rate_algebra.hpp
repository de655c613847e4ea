#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "bcsec/probability.hpp"

namespace bcsec {

using Rational = boost::multiprecision::cpp_rational;

std::string rational_to_string(const Rational& r);

class SystemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Symbolic I(A;B|C). Stored canonically (A before B by bitmask) so that syntactic
/// equality of terms is meaningful.
struct InfoTerm {
    VarSet a;
    VarSet b;
    VarSet c;

    static InfoTerm make(VarSet a, VarSet b, VarSet c = {});
    std::string to_string() const;
    /// Parses "I(V,V1;Y1|U)".
    static InfoTerm parse(std::string_view text);

    auto operator<=>(const InfoTerm&) const = default;
};

/// sum_k rate_k * R_k + sum_t info_t * I_t + constant. Zero coefficients are never stored.
struct LinearExpr {
    std::map<std::string, Rational> rates;
    std::map<InfoTerm, Rational> infos;
    Rational constant = 0;

    LinearExpr& add_rate(const std::string& var, const Rational& coef);
    LinearExpr& add_info(const InfoTerm& term, const Rational& coef);
    LinearExpr& add_constant(const Rational& c);
    LinearExpr& operator+=(const LinearExpr& other);
    LinearExpr& operator-=(const LinearExpr& other);
    LinearExpr operator-() const;
    LinearExpr scaled(const Rational& s) const;

    Rational rate(const std::string& var) const;
    bool has_rates() const { return !rates.empty(); }
    bool is_constant() const { return rates.empty() && infos.empty(); }
    bool operator==(const LinearExpr&) const = default;

    std::string to_string() const;
};

LinearExpr rate(const std::string& var, const Rational& coef = 1);
LinearExpr info(VarSet a, VarSet b, VarSet c = {}, const Rational& coef = 1);
LinearExpr operator+(LinearExpr lhs, const LinearExpr& rhs);
LinearExpr operator-(LinearExpr lhs, const LinearExpr& rhs);

enum class Relation { lt, le, eq, ge, gt };

std::string_view relation_symbol(Relation r);
Relation parse_relation(std::string_view s);
bool is_strict(Relation r);

/// expr (relation) 0. Rate-free constraints are subject-to gates.
struct Constraint {
    LinearExpr expr;
    Relation relation = Relation::le;
    std::string label;
    /// Nonnegative combination of the producing system's basis (index -> multiplier);
    /// equality rows may carry any sign. Empty for transcribed constraints.
    std::map<std::size_t, Rational> certificate;

    bool is_gate() const { return !expr.has_rates(); }
    /// Expression E with the constraint read as E <= 0, E < 0 or E = 0.
    LinearExpr oriented() const;
    std::string to_string() const;
};

/// Builds `lhs (rel) rhs` as a constraint on lhs - rhs.
Constraint make_constraint(const LinearExpr& lhs, Relation rel, const LinearExpr& rhs,
                           std::string label);

struct ConstraintSystem {
    std::string name;
    std::vector<std::string> free_vars;
    std::vector<std::string> bound_vars;
    std::vector<Constraint> constraints;
    /// Auxiliary substitution that must be applied to a joint before instantiation.
    Collapse collapse = Collapse::none;
    /// Constraints of the system this one was derived from; certificates index into it.
    std::vector<Constraint> basis;
    std::vector<std::string> notes;

    std::size_t count(Relation r) const;
    std::vector<const Constraint*> gates() const;
    /// Throws if a constraint uses an undeclared variable.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Presets

std::vector<std::string> preset_names();
ConstraintSystem preset_system(std::string_view name);
bool is_preset(std::string_view name);

/// Default elimination order (split, dummy, then Marton rates).
const std::vector<std::string>& default_elimination_order();

// ---------------------------------------------------------------------------
// Fourier-Motzkin

class FmCapExceeded : public SystemError {
public:
    using SystemError::SystemError;
};

struct FmOptions {
    std::size_t cap = 10000;
};

/// Folds every equality into the remaining rows by solving it for one bound variable.
/// The returned system keeps the input as its basis and records certificates.
ConstraintSystem substitute_equalities(const ConstraintSystem& system);

/// Projects out `order` (equalities folded first). Info terms are treated as opaque
/// constants. Duplicate and coefficient-proportional dominated rows are pruned.
ConstraintSystem fm_eliminate(const ConstraintSystem& system, const std::vector<std::string>& order,
                              FmOptions options = {});
/// Eliminates every bound variable in default order.
ConstraintSystem fm_eliminate(const ConstraintSystem& system, FmOptions options = {});

/// Recomputes a constraint from its certificate over `system.basis`.
/// Returns false if the combination does not reproduce it exactly, uses a negative
/// multiplier on an inequality, or gets strictness wrong.
bool verify_certificate(const ConstraintSystem& system, std::size_t index);

/// Same projection with every strict relation relaxed to its closure.
ConstraintSystem relaxed(const ConstraintSystem& system);

// ---------------------------------------------------------------------------
// Numeric instantiation

struct NumericConstraint {
    std::vector<double> coeffs;  ///< one per free variable
    double rhs = 0.0;            ///< sum coeffs*vars (<= or <) rhs
    bool strict = false;
    std::string label;
};

struct GateValue {
    std::string label;
    double slack = 0.0;  ///< rhs - lhs in the oriented reading; >= 0 means satisfied
    bool strict = false;
    bool holds_closure = false;
    bool holds_strict = false;
};

inline constexpr double kGateTol = 1e-9;

struct Instance {
    std::vector<std::string> vars;
    std::vector<NumericConstraint> halfplanes;
    std::vector<GateValue> gates;

    bool gates_hold() const;
    double max_abs_rhs() const;
};

/// Replaces every info term by its value on `j` (used as given; see prepare_joint).
Instance instantiate(const ConstraintSystem& system, const JointDistribution& j);
/// Applies the system's declared auxiliary substitution to `j`.
JointDistribution prepare_joint(const ConstraintSystem& system, const JointDistribution& j);

// ---------------------------------------------------------------------------
// Numeric equivalence

enum class Verdict { pass, fail, inconclusive };
std::string_view verdict_name(Verdict v);

struct EquivOptions {
    std::size_t binary_samples = 100;
    std::size_t ternary_samples = 10;
    std::size_t grid = 400;
    double band = 1e-6;
    std::uint64_t seed = 1;
    std::size_t retry_budget = 50;
};

struct EquivSample {
    std::size_t index = 0;
    std::size_t alphabet = 2;
    std::size_t disagreeing_cells = 0;
    std::size_t counted_cells = 0;
    double rmax = 0.0;
    std::vector<std::pair<double, double>> witnesses;  ///< up to 8 cell centers
};

struct EquivReport {
    Verdict verdict = Verdict::inconclusive;
    std::vector<EquivSample> samples;
    std::size_t skipped = 0;  ///< sampled joints rejected by gates or band-ambiguous gates
    std::string diagnostic;

    std::size_t total_disagreement() const;
};

/// Joint generator used by equiv_check; receives (stream seed, alphabet size).
using JointSource = std::function<JointDistribution(std::uint64_t seed, std::size_t alphabet)>;
JointSource default_joint_source();

/// Compares two systems over (R1,R2) on sampled joints by rasterizing both instantiated
/// regions (closures) over [0,Rmax]^2, where Rmax is 1.25 times the largest axis
/// intercept of any boundary line. Cells within `band` of any boundary line are
/// ignored. Joints are kept only if `b`'s gates hold.
EquivReport equiv_check(const ConstraintSystem& a, const ConstraintSystem& b,
                        const EquivOptions& options = {},
                        const JointSource& source = default_joint_source());

/// Rasterized disagreement for one pair of instances (exposed for tests).
EquivSample compare_instances(const Instance& a, const Instance& b, std::size_t grid, double band);

}  // namespace bcsec
