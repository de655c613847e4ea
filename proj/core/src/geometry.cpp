#include "bcsec/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "bcsec/dist_io.hpp"

namespace bcsec {

namespace {

using enum Var;

double cross(Point o, Point a, Point b) {
    return (a.r1 - o.r1) * (b.r2 - o.r2) - (a.r2 - o.r2) * (b.r1 - o.r1);
}

double dist(Point a, Point b) { return std::hypot(a.r1 - b.r1, a.r2 - b.r2); }

double segment_distance(Point p, Point a, Point b) {
    const double dx = b.r1 - a.r1, dy = b.r2 - a.r2;
    const double len2 = dx * dx + dy * dy;
    if (len2 == 0.0) return dist(p, a);
    const double t = std::clamp(((p.r1 - a.r1) * dx + (p.r2 - a.r2) * dy) / len2, 0.0, 1.0);
    return dist(p, Point{a.r1 + t * dx, a.r2 + t * dy});
}

std::vector<Point> clip(const std::vector<Point>& poly, const HalfPlane& h) {
    std::vector<Point> out;
    const std::size_t n = poly.size();
    const auto side = [&](Point p) { return h.a * p.r1 + h.b * p.r2 - h.c; };
    for (std::size_t i = 0; i < n; ++i) {
        const Point p = poly[i];
        const Point q = poly[(i + 1) % n];
        const double sp = side(p), sq = side(q);
        if (sp <= 0) out.push_back(p);
        if ((sp < 0 && sq > 0) || (sp > 0 && sq < 0)) {
            const double t = sp / (sp - sq);
            out.push_back(Point{p.r1 + t * (q.r1 - p.r1), p.r2 + t * (q.r2 - p.r2)});
        }
    }
    return out;
}

std::vector<Point> tidy(std::vector<Point> poly) {
    std::vector<Point> out;
    for (const Point& p : poly)
        if (out.empty() || dist(out.back(), p) > kGeomTol) out.push_back(p);
    while (out.size() > 1 && dist(out.front(), out.back()) <= kGeomTol) out.pop_back();
    bool changed = out.size() > 2;
    while (changed && out.size() > 2) {
        changed = false;
        for (std::size_t i = 0; i < out.size() && out.size() > 2; ++i) {
            const Point a = out[(i + out.size() - 1) % out.size()];
            const Point b = out[i];
            const Point c = out[(i + 1) % out.size()];
            const double chord = dist(a, c);
            const double off = chord > 0 ? std::abs(cross(a, c, b)) / chord : dist(a, b);
            if (off <= kGeomTol) {
                out.erase(out.begin() + std::ptrdiff_t(i));
                changed = true;
                break;
            }
        }
    }
    return out;
}

const ConstraintSystem& cached(std::string_view name) {
    static const ConstraintSystem reg_old = preset_system("REG-OLD");
    static const ConstraintSystem new2_0 = preset_system("REG-NEW2-0");
    static const ConstraintSystem new2_1 = preset_system("REG-NEW2-1");
    static const ConstraintSystem new2_2 = preset_system("REG-NEW2-2");
    static const ConstraintSystem sub_1 = preset_system("REG-SUB-1");
    static const ConstraintSystem sub_2 = preset_system("REG-SUB-2");
    if (name == "REG-OLD") return reg_old;
    if (name == "REG-NEW2-0") return new2_0;
    if (name == "REG-NEW2-1") return new2_1;
    if (name == "REG-NEW2-2") return new2_2;
    if (name == "REG-SUB-1") return sub_1;
    return sub_2;
}

double mi(const JointDistribution& j, VarSet a, VarSet b, VarSet c = {}) {
    return j.cond_mutual_info(a, b, c).bits;
}

}  // namespace

Region2D polygon_from_halfplanes(const std::vector<HalfPlane>& halfplanes, double rmax) {
    Region2D r;
    r.halfplanes = halfplanes;
    r.rmax = rmax;
    std::vector<Point> poly = {{0, 0}, {rmax, 0}, {rmax, rmax}, {0, rmax}};
    for (const auto& h : halfplanes) {
        if (poly.empty()) break;
        if (h.a == 0.0 && h.b == 0.0) {
            if (h.c < 0.0) poly.clear();
            continue;
        }
        poly = clip(poly, h);
    }
    r.vertices = tidy(std::move(poly));
    return r;
}

Region2D region_from_instance(const Instance& inst, std::optional<double> rmax) {
    if (inst.vars.size() != 2) throw SystemError("region needs exactly two free variables");
    const bool swapped = inst.vars[0] == "R2";
    std::vector<HalfPlane> hs;
    for (const auto& h : inst.halfplanes) {
        HalfPlane p{h.coeffs[0], h.coeffs[1], h.rhs, h.strict};
        if (swapped) std::swap(p.a, p.b);
        hs.push_back(p);
    }
    Region2D r = polygon_from_halfplanes(hs, rmax.value_or(1.0 + inst.max_abs_rhs()));
    r.gates_hold = inst.gates_hold();
    if (!r.gates_hold) r.vertices.clear();
    return r;
}

Region2D instantiate_region(const ConstraintSystem& system, const JointDistribution& j,
                            std::optional<double> rmax) {
    return region_from_instance(instantiate(system, prepare_joint(system, j)), rmax);
}

double distance_to_polygon(const std::vector<Point>& poly, Point p) {
    const std::size_t n = poly.size();
    if (n == 0) return std::numeric_limits<double>::infinity();
    if (n == 1) return dist(p, poly[0]);
    if (n >= 3) {
        bool inside = true;
        for (std::size_t i = 0; i < n && inside; ++i)
            if (cross(poly[i], poly[(i + 1) % n], p) < 0) inside = false;
        if (inside) return 0.0;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        best = std::min(best, segment_distance(p, poly[i], poly[(i + 1) % n]));
    return best;
}

bool contains(const Region2D& region, Point p, bool closure) {
    if (!region.gates_hold) return false;
    if (p.r1 < -kGeomTol || p.r2 < -kGeomTol) return false;
    if (region.halfplanes.empty()) return distance_to_polygon(region.vertices, p) <= kGeomTol;
    for (const auto& h : region.halfplanes) {
        const double v = h.a * p.r1 + h.b * p.r2 - h.c;
        if (!closure && h.strict) {
            if (!(v < 0.0)) return false;
        } else if (v > kGeomTol) {
            return false;
        }
    }
    return true;
}

bool contains_region(const Region2D& outer, const Region2D& inner, double tol) {
    if (inner.empty()) return true;
    if (outer.empty()) return false;
    return std::all_of(inner.vertices.begin(), inner.vertices.end(),
                       [&](Point v) { return distance_to_polygon(outer.vertices, v) <= tol; });
}

bool equals(const Region2D& a, const Region2D& b, double tol) {
    if (a.empty() || b.empty()) return a.empty() && b.empty();
    return contains_region(a, b, tol) && contains_region(b, a, tol);
}

std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(),
              [](Point a, Point b) { return a.r1 < b.r1 || (a.r1 == b.r1 && a.r2 < b.r2); });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Point a, Point b) { return a.r1 == b.r1 && a.r2 == b.r2; }),
              pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (const Point& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

Region2D hull_union(const std::vector<Region2D>& regions) {
    Region2D out;
    std::vector<Point> pts;
    for (const auto& r : regions) {
        out.rmax = std::max(out.rmax, r.rmax);
        if (r.gates_hold) pts.insert(pts.end(), r.vertices.begin(), r.vertices.end());
    }
    out.vertices = tidy(convex_hull(std::move(pts)));
    return out;
}

SpecialPoints special_points(const JointDistribution& j) {
    SpecialPoints s;
    s.E = mi(j, {V}, {Z}, {U});
    s.B = mi(j, {V, V1}, {Y1}, {U}) - mi(j, {V, V1}, {Z}, {U});
    s.D = mi(j, {V, V2}, {Y2}, {U}) - mi(j, {V, V2}, {Z}, {U});
    s.A = mi(j, {U}, {Y1}) + s.B + s.E;
    s.C = mi(j, {U}, {Y2}) + s.D + s.E;
    s.s = {Point{s.A, 0}, Point{s.B, 0}, Point{0, s.C},
           Point{0, s.D}, Point{s.E, 0}, Point{0, s.E}};
    return s;
}

std::string_view cut_case_name(CutCase c) {
    switch (c) {
        case CutCase::square_t1: return "square-T1";
        case CutCase::hexagonal_t2: return "hexagonal-T2";
        case CutCase::pentagonal_t3: return "pentagonal-T3";
        case CutCase::pentagonal_t4: return "pentagonal-T4";
    }
    return "?";
}

CutResult classify_cut(const JointDistribution& j) {
    CutResult r;
    r.applicable = instantiate(cached("REG-NEW2-0"), j).gates_hold();
    const SpecialPoints s = special_points(j);
    r.E = s.E;
    r.B = s.B;
    r.D = s.D;
    const bool above_b = s.E > s.B;
    const bool above_d = s.E > s.D;
    if (!above_b && !above_d) r.cut = CutCase::square_t1;
    else if (above_b && above_d) r.cut = CutCase::hexagonal_t2;
    else if (above_b) r.cut = CutCase::pentagonal_t3;
    else r.cut = CutCase::pentagonal_t4;
    return r;
}

namespace {

RecoveryResult recover(const JointDistribution& j, int axis) {
    RecoveryResult r;
    r.applicable = instantiate(cached("REG-OLD"), j).gates_hold();
    const SpecialPoints s = special_points(j);
    r.coordinate = axis == 1 ? s.B : s.D;
    const Region2D full = instantiate_region(cached(axis == 1 ? "REG-NEW2-2" : "REG-NEW2-1"), j);
    const Region2D sub = instantiate_region(cached(axis == 1 ? "REG-SUB-2" : "REG-SUB-1"), j);
    const auto at = [&](double t) { return axis == 1 ? Point{t, 0} : Point{0, t}; };
    r.closed_member = contains(full, at(r.coordinate)) && contains(sub, at(r.coordinate));
    const Point inner = at(r.coordinate - std::min(1e-6, 0.5 * r.coordinate));
    r.interior_member = contains(full, inner, false) && contains(sub, inner, false);
    return r;
}

}  // namespace

RecoveryResult recover_s2(const JointDistribution& j) { return recover(j, 1); }
RecoveryResult recover_s4(const JointDistribution& j) { return recover(j, 2); }

double mixture_linearity_error(const JointDistribution& alpha, const JointDistribution& beta,
                               double gamma) {
    const JointDistribution mix = timeshare_mix(alpha, beta, gamma);
    const std::array<std::array<VarSet, 3>, 9> terms = {{
        {{{V}, {Z}, {U}}},
        {{{U}, {Y1}, {}}},
        {{{V, V1}, {Y1}, {U}}},
        {{{V, V2}, {Y2}, {U}}},
        {{{V1}, {Z}, {V}}},
        {{{V2}, {Z}, {V}}},
        {{{V1}, {V2}, {V}}},
        {{{V1}, {Y1}, {V}}},
        {{{V2}, {Y2}, {V}}},
    }};
    double worst = 0.0;
    for (const auto& t : terms) {
        const double lhs = mi(mix, t[0], t[1], t[2]);
        const double rhs = gamma * mi(alpha, t[0], t[1], t[2]) +
                           (1.0 - gamma) * mi(beta, t[0], t[1], t[2]);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

const std::vector<double>& default_gamma_ladder() {
    static const std::vector<double> ladder = {0.5, 0.1, 0.02, 0.004};
    return ladder;
}

ApproachResult boundary_approach(const JointDistribution& j, const std::vector<double>& gammas,
                                 double eps) {
    ApproachResult r;
    const SpecialPoints s = special_points(j);
    r.B = s.B;
    r.E = s.E;
    r.resolved = std::min({s.A - s.B - s.E, s.C - s.D - s.E, s.B, s.D}) >= 2 * eps;
    const Point origin{eps, eps};
    const Point axis{s.B - eps, eps};
    const Region2D old = instantiate_region(cached("REG-OLD"), j);
    r.origin_applicable = contains(old, origin, false);
    r.axis_applicable = contains(old, axis, false);
    const JointDistribution beta = substitute_aux(j, Collapse::collapse2);
    for (double g : gammas) {
        r.linearity_error = std::max(r.linearity_error, mixture_linearity_error(j, beta, g));
        const Region2D region = instantiate_region(cached("REG-NEW2-0"), timeshare_mix(j, beta, g));
        const bool ok = (!r.origin_applicable || contains(region, origin, false)) &&
                        (!r.axis_applicable || contains(region, axis, false));
        if (ok && !r.gamma) r.gamma = g;
    }
    r.success = r.origin_applicable && r.gamma.has_value();
    return r;
}

std::string region_csv(const Region2D& region) {
    std::string out = "R1,R2\n";
    char buf[96];
    for (const Point& p : region.vertices) {
        std::snprintf(buf, sizeof buf, "%.9f,%.9f\n", p.r1, p.r2);
        out += buf;
    }
    return out;
}

std::string region_svg(const Region2D& region) {
    constexpr double kScale = 100.0;
    constexpr double kMargin = 20.0;
    const double side = region.rmax * kScale;
    const double w = side + 2 * kMargin;
    const auto px = [&](Point p) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.4f %.4f", kMargin + p.r1 * kScale,
                      kMargin + side - p.r2 * kScale);
        return std::string(buf);
    };
    std::ostringstream ss;
    ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << w
       << "\" viewBox=\"0 0 " << w << ' ' << w << "\">\n";
    ss << "<!-- rmax=" << region.rmax << " bits, 100 px per bit -->\n";
    ss << "<path d=\"M " << px({0, 0}) << " L " << px({region.rmax, 0}) << " M " << px({0, 0})
       << " L " << px({0, region.rmax}) << "\" stroke=\"black\" fill=\"none\"/>\n";
    if (!region.empty()) {
        ss << "<path d=\"M " << px(region.vertices.front());
        for (std::size_t i = 1; i < region.vertices.size(); ++i) ss << " L " << px(region.vertices[i]);
        ss << " Z\" fill=\"#9ecae1\" stroke=\"#08519c\"/>\n";
    }
    ss << "</svg>\n";
    return ss.str();
}

void export_region(const Region2D& region, const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".svg") {
        write_file_atomic(path, region_svg(region));
    } else if (ext == ".csv") {
        write_file_atomic(path, region_csv(region));
    } else {
        throw std::runtime_error("export format must be .csv or .svg: " + path.string());
    }
}

}  // namespace bcsec
