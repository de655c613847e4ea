#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bcsec/coding_sim.hpp"
#include "bcsec/geometry.hpp"

namespace bcsec::suite {

enum class Status { pass, fail, inconclusive };
std::string_view status_name(Status s);

struct CriterionResult {
    int id = 0;
    std::string title;
    Status status = Status::inconclusive;
    std::string detail;
    double seconds = 0.0;
    nlohmann::json data = nlohmann::json::object();
};

struct SuiteOptions {
    std::uint64_t seed = 1;
    std::filesystem::path data_dir;
    FmOptions fm;
    SimCaps caps;
};

/// Directory holding the frozen cut witnesses, resolved at build time.
std::filesystem::path default_data_dir();

CriterionResult derivation_equivalences(const SuiteOptions& o);   // 1
CriterionResult fm_certificates(const SuiteOptions& o);           // 2
CriterionResult containment_and_cuts(const SuiteOptions& o);      // 3
CriterionResult recovery(const SuiteOptions& o);                  // 4
CriterionResult mixtures(const SuiteOptions& o);                  // 5
CriterionResult simulator_exactness(const SuiteOptions& o);       // 6
CriterionResult simulator_behavior(const SuiteOptions& o);        // 7
CriterionResult geometry_oracle(const SuiteOptions& o);           // 8

inline constexpr int kCriteria = 8;
CriterionResult run_criterion(int id, const SuiteOptions& o);
std::vector<CriterionResult> run_suite(const SuiteOptions& o, const std::vector<int>& ids);

/// "criterion 3 PASS  containment and cut structure: ... (1.2 s)"
std::string summary_line(const CriterionResult& r);
nlohmann::json to_json(const CriterionResult& r);
/// 0 if every result passed, 1 if any failed, else 2.
int exit_code(const std::vector<CriterionResult>& results);

// Pieces shared with the unit tests.

/// I(M_i;Z^n)/n by enumerating every (m1,m2,d,d1,d2,l1,l2,x^n,z^n) tuple directly from the
/// codebook tables, with its own typicality scan for the Marton choice.
double brute_force_leakage(const Codebook& cb, const SchemeConfig& config, int i);

/// Vertex-free membership oracle: strictly inside every halfplane and the box.
bool halfplane_member(const std::vector<HalfPlane>& hs, double rmax, Point p);
/// Point strictly inside a CCW convex polygon, by edge cross products.
bool polygon_member(const std::vector<Point>& poly, Point p);

/// Test joint and rate point used for the simulator trend criterion.
JointDistribution trend_joint();
SchemeRates trend_rates();

}  // namespace bcsec::suite
