#include <algorithm>
#include <cmath>
#include <map>

#include "bcsec/rate_algebra.hpp"

namespace bcsec {

bool Instance::gates_hold() const {
    return std::all_of(gates.begin(), gates.end(), [](const GateValue& g) { return g.holds_closure; });
}

double Instance::max_abs_rhs() const {
    double m = 0.0;
    for (const auto& h : halfplanes) m = std::max(m, std::abs(h.rhs));
    return m;
}

JointDistribution prepare_joint(const ConstraintSystem& system, const JointDistribution& j) {
    if (system.collapse == Collapse::none) return j;
    return substitute_aux(j, system.collapse);
}

Instance instantiate(const ConstraintSystem& system, const JointDistribution& j) {
    Instance inst;
    inst.vars = system.free_vars;
    std::map<InfoTerm, double> cache;
    const auto value = [&](const InfoTerm& t) {
        auto it = cache.find(t);
        if (it == cache.end()) it = cache.emplace(t, j.cond_mutual_info(t.a, t.b, t.c).bits).first;
        return it->second;
    };

    for (const auto& c : system.constraints) {
        const LinearExpr e = c.oriented();
        double offset = e.constant.convert_to<double>();
        for (const auto& [term, coef] : e.infos) offset += coef.convert_to<double>() * value(term);
        const bool strict = is_strict(c.relation);

        if (!e.has_rates()) {
            GateValue g;
            g.label = c.label;
            g.slack = -offset;
            g.strict = strict;
            if (c.relation == Relation::eq) {
                g.holds_closure = std::abs(offset) <= kGateTol;
                g.holds_strict = offset == 0.0;
            } else {
                g.holds_closure = offset <= kGateTol;
                g.holds_strict = strict ? offset < 0.0 : offset <= 0.0;
            }
            inst.gates.push_back(std::move(g));
            continue;
        }

        NumericConstraint h;
        h.coeffs.assign(inst.vars.size(), 0.0);
        for (const auto& [var, coef] : e.rates) {
            auto it = std::find(inst.vars.begin(), inst.vars.end(), var);
            if (it == inst.vars.end())
                throw SystemError("cannot instantiate '" + c.label + "': " + var +
                                  " is not a free variable");
            h.coeffs[std::size_t(it - inst.vars.begin())] = coef.convert_to<double>();
        }
        h.rhs = -offset;
        h.strict = strict;
        h.label = c.label;
        if (c.relation == Relation::eq) {
            NumericConstraint lower = h;
            for (auto& a : lower.coeffs) a = -a;
            lower.rhs = -h.rhs;
            inst.halfplanes.push_back(std::move(lower));
        }
        inst.halfplanes.push_back(std::move(h));
    }
    return inst;
}

}  // namespace bcsec
