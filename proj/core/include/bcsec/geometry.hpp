#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bcsec/rate_algebra.hpp"

namespace bcsec {

inline constexpr double kGeomTol = 1e-9;

struct Point {
    double r1 = 0.0;
    double r2 = 0.0;
};

/// a*R1 + b*R2 <= c (or < c when strict).
struct HalfPlane {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    bool strict = false;
};

/// Region in the (R1,R2) plane, always intersected with R1,R2 >= 0. `vertices` is the
/// CCW closure polygon clipped to [0,rmax]^2; it may degenerate to a segment or a point.
struct Region2D {
    std::vector<HalfPlane> halfplanes;
    std::vector<Point> vertices;
    double rmax = 1.0;
    /// False when the region's subject-to gates fail; the region is then empty.
    bool gates_hold = true;

    bool empty() const { return vertices.empty(); }
};

Region2D polygon_from_halfplanes(const std::vector<HalfPlane>& halfplanes, double rmax);

/// Region of an instance; rmax defaults to 1 + the largest |rhs|.
Region2D region_from_instance(const Instance& inst, std::optional<double> rmax = {});
/// prepare_joint + instantiate + region_from_instance.
Region2D instantiate_region(const ConstraintSystem& system, const JointDistribution& j,
                            std::optional<double> rmax = {});

/// Membership against the halfplanes (strictness honored unless `closure`). Regions
/// without halfplanes (hulls) are tested against their vertex polygon.
bool contains(const Region2D& region, Point p, bool closure = true);

/// Euclidean distance from p to the closure polygon (0 inside).
double distance_to_polygon(const std::vector<Point>& poly, Point p);

/// Every vertex of `inner` lies within tol of `outer`'s polygon.
bool contains_region(const Region2D& outer, const Region2D& inner, double tol = kGeomTol);
/// Hausdorff distance between closure polygons at most tol.
bool equals(const Region2D& a, const Region2D& b, double tol = kGeomTol);

std::vector<Point> convex_hull(std::vector<Point> points);
Region2D hull_union(const std::vector<Region2D>& regions);

struct SpecialPoints {
    double A = 0.0, B = 0.0, C = 0.0, D = 0.0, E = 0.0;
    /// Closed coordinates (A,0),(B,0),(0,C),(0,D),(E,0),(0,E).
    std::array<Point, 6> s{};
    /// Each s-point is the limit of points an arbitrarily small step inside.
    bool epsilon_open = true;
};

SpecialPoints special_points(const JointDistribution& j);

enum class CutCase { square_t1, hexagonal_t2, pentagonal_t3, pentagonal_t4 };
std::string_view cut_case_name(CutCase c);

struct CutResult {
    bool applicable = false;  ///< subject-to gates of REG-NEW2-0 hold
    CutCase cut = CutCase::square_t1;
    double E = 0.0, B = 0.0, D = 0.0;
};

CutResult classify_cut(const JointDistribution& j);

struct RecoveryResult {
    bool applicable = false;       ///< REG-OLD gates hold on J
    bool closed_member = false;    ///< the axis point lies in both closures
    bool interior_member = false;  ///< a point min(1e-6, coordinate/2) further in lies in both open regions
    double coordinate = 0.0;       ///< B for s2, D for s4
};

/// (B,0) against REG-NEW2-2 on collapse-2(J) and REG-SUB-2 on J.
RecoveryResult recover_s2(const JointDistribution& j);
/// (0,D) against REG-NEW2-1 on collapse-1(J) and REG-SUB-1 on J.
RecoveryResult recover_s4(const JointDistribution& j);

/// Largest |T(mix) - gamma T(alpha) - (1-gamma) T(beta)| over the nine mixture terms.
double mixture_linearity_error(const JointDistribution& alpha, const JointDistribution& beta,
                               double gamma);

struct ApproachResult {
    bool success = false;
    std::optional<double> gamma;  ///< first ladder value where every applicable point is a member
    bool origin_applicable = false;  ///< (eps,eps) is interior to REG-OLD(J)
    bool axis_applicable = false;    ///< (B-eps,eps) is interior to REG-OLD(J)
    /// I(U;Y1), I(U;Y2), B and D all at least 2*eps, so the small-gamma argument applies.
    bool resolved = false;
    double B = 0.0;
    double E = 0.0;
    double linearity_error = 0.0;  ///< worst mixture identity error over the ladder
};

const std::vector<double>& default_gamma_ladder();

/// Mixes J with collapse-2(J) at each gamma and tests (eps,eps) and (B-eps,eps) against
/// the open REG-NEW2-0 region of the mixture (gates in closure).
ApproachResult boundary_approach(const JointDistribution& j,
                                 const std::vector<double>& gammas = default_gamma_ladder(),
                                 double eps = 1e-3);

/// "R1,R2" header plus one vertex per line, 9 decimals.
std::string region_csv(const Region2D& region);
/// Single polygon path with axes at 100 px per bit.
std::string region_svg(const Region2D& region);
void export_region(const Region2D& region, const std::filesystem::path& path);

}  // namespace bcsec
