#include <algorithm>
#include <array>

#include "bcsec/rate_algebra.hpp"

namespace bcsec {

namespace {

using enum Var;

LinearExpr R(const std::string& v) { return rate(v); }
LinearExpr I(VarSet a, VarSet b, VarSet c = {}) { return info(a, b, c); }
const LinearExpr kZero{};

// Recurring mutual-information expressions.
LinearExpr marton_secrecy_bound() {
    return I({V1}, {Z}, {V}) + I({V2}, {Z}, {V}) - I({V1, V2}, {Z}, {V});
}
LinearExpr cloud_secrecy() { return I({V}, {Z}, {U}); }
LinearExpr net_private(Var vi, Var yi) { return I({V, vi}, {yi}, {U}) - I({V, vi}, {Z}, {U}); }
LinearExpr total_bound(Var vi, Var yi) {
    return I({U}, {yi}) + net_private(vi, yi) + cloud_secrecy();
}

struct Builder {
    ConstraintSystem sys;

    Builder(std::string name, std::vector<std::string> free, std::vector<std::string> bound) {
        sys.name = std::move(name);
        sys.free_vars = std::move(free);
        sys.bound_vars = std::move(bound);
    }
    Builder& add(const LinearExpr& lhs, Relation rel, const LinearExpr& rhs, std::string label) {
        sys.constraints.push_back(make_constraint(lhs, rel, rhs, std::move(label)));
        return *this;
    }
    Builder& nonneg(const std::vector<std::string>& vars) {
        for (const auto& v : vars) add(R(v), Relation::ge, kZero, "nonneg " + v);
        return *this;
    }
    ConstraintSystem done() {
        sys.validate();
        return std::move(sys);
    }
};

// Marton cover/secrecy and the three-layer decoding constraints shared by the
// original scheme and its first simplification. `dummy` is "RD" or empty.
void layered_body(Builder& b, const std::string& dummy, const std::array<std::string, 9>& tags) {
    using rel = Relation;
    const auto d = [&](LinearExpr e) { return dummy.empty() ? e : e + R(dummy); };
    b.add(R("RL1") + R("RL2"), rel::gt, I({V1}, {V2}, {V}), tags[0]);
    b.add(d(R("R1") + R("RD1") + R("RL1")), rel::lt, I({U, V, V1}, {Y1}), tags[1]);
    b.add(d(R("R1") - R("Ra") + R("RD1") + R("RL1")), rel::lt, I({V, V1}, {Y1}, {U}), tags[2]);
    b.add(R("R1d") + R("RD1") + R("RL1"), rel::lt, I({V1}, {Y1}, {V}), tags[3]);
    b.add(d(R("R2") + R("RD2") + R("RL2")), rel::lt, I({U, V, V2}, {Y2}), tags[4]);
    b.add(d(R("R2") - R("Ra") + R("RD2") + R("RL2")), rel::lt, I({V, V2}, {Y2}, {U}), tags[5]);
    b.add(R("R2d") + R("RD2") + R("RL2"), rel::lt, I({V2}, {Y2}, {V}), tags[6]);
    b.add(R("RD1") + R("RL1"), rel::ge, I({V1}, {Z}, {V}), tags[7]);
    b.add(R("RD2") + R("RL2"), rel::ge, I({V2}, {Z}, {V}), tags[8]);
}

const std::array<std::string, 9> kPlainTags = {
    "marton cover",   "decode-1 total",   "decode-1 cloud",    "decode-1 private", "decode-2 total",
    "decode-2 cloud", "decode-2 private", "private secrecy-1", "private secrecy-2"};

ConstraintSystem sys_old() {
    Builder b("SYS-OLD", {"R1", "R2"},
              {"Ra", "Rb", "R1c", "R1d", "R2c", "R2d", "RD", "RD1", "RD2", "RL1", "RL2"});
    b.add(R("R1"), Relation::eq, R("Ra") + R("Rb") + R("R1c") + R("R1d"), "split-1");
    b.add(R("R2"), Relation::eq, R("Ra") + R("Rb") + R("R2c") + R("R2d"), "split-2");
    layered_body(b, "RD", kPlainTags);
    b.add(R("Rb") + R("RD"), Relation::ge, cloud_secrecy(), "common secrecy (a)");
    b.add(R("RL1") + R("RL2"), Relation::le, marton_secrecy_bound(), "marton secrecy");
    b.nonneg({"R1", "Ra", "Rb", "R1c", "R1d", "R2", "R2c", "R2d", "RD", "RD1", "RD2", "RL1", "RL2"});
    return b.done();
}

ConstraintSystem sys_oldp() {
    Builder b("SYS-OLDP", {"R1", "R2"},
              {"Ra", "Rb", "R1c", "R1d", "R2c", "R2d", "RD", "RD1", "RD2", "RL1", "RL2"});
    b.add(R("R1"), Relation::eq, R("Ra") + R("Rb") + R("R1c") + R("R1d"), "split-1");
    b.add(R("R2"), Relation::eq, R("Ra") + R("Rb") + R("R2c") + R("R2d"), "split-2");
    layered_body(b, "RD", kPlainTags);
    b.add(R("Rb") + R("R1c") + R("RD"), Relation::ge, cloud_secrecy(), "common secrecy-1 (a)");
    b.add(R("Rb") + R("R2c") + R("RD"), Relation::ge, cloud_secrecy(), "common secrecy-2 (b)");
    b.add(R("RL1") + R("RL2"), Relation::le, marton_secrecy_bound(), "marton secrecy");
    b.nonneg({"R1", "Ra", "Rb", "R1c", "R1d", "R2", "R2c", "R2d", "RD", "RD1", "RD2", "RL1", "RL2"});
    return b.done();
}

ConstraintSystem sys_new1() {
    Builder b("SYS-NEW1", {"R1", "R2"},
              {"Ra", "R1c", "R1d", "R2c", "R2d", "RD", "RD1", "RD2", "RL1", "RL2"});
    b.add(R("R1"), Relation::eq, R("Ra") + R("R1c") + R("R1d"), "split-1");
    b.add(R("R2"), Relation::eq, R("Ra") + R("R2c") + R("R2d"), "split-2");
    layered_body(b, "RD", kPlainTags);
    b.add(R("R1c") + R("RD"), Relation::ge, cloud_secrecy(), "common secrecy-1");
    b.add(R("R2c") + R("RD"), Relation::ge, cloud_secrecy(), "common secrecy-2");
    b.add(R("RL1") + R("RL2"), Relation::le, marton_secrecy_bound(), "marton secrecy");
    b.nonneg({"R1", "Ra", "R1c", "R1d", "R2", "R2c", "R2d", "RD", "RD1", "RD2", "RL1", "RL2"});
    return b.done();
}

ConstraintSystem sys_new2() {
    Builder b("SYS-NEW2", {"R1", "R2"},
              {"Ra", "R1c", "R1d", "R2c", "R2d", "RD1", "RD2", "RL1", "RL2"});
    b.add(R("R1"), Relation::eq, R("Ra") + R("R1c") + R("R1d"), "split-1");
    b.add(R("R2"), Relation::eq, R("Ra") + R("R2c") + R("R2d"), "split-2");
    const std::array<std::string, 9> tags = {
        "marton cover (a)",      "decode-1 total",      "decode-1 cloud (b)",
        "decode-1 private (c)",  "decode-2 total",      "decode-2 cloud (d)",
        "decode-2 private (e)",  "private secrecy-1 (f)", "private secrecy-2 (g)"};
    layered_body(b, "", tags);
    b.add(R("R1c"), Relation::ge, cloud_secrecy(), "common floor-1 (h)");
    b.add(R("R2c"), Relation::ge, cloud_secrecy(), "common floor-2 (i)");
    b.add(R("RL1") + R("RL2"), Relation::le, marton_secrecy_bound(), "marton secrecy (j)");
    b.nonneg({"R1", "Ra", "R1c", "R1d", "R2", "R2c", "R2d", "RD1", "RD2", "RL1", "RL2"});
    return b.done();
}

// Reduced superposition scheme with V_i = V = U: only U and V_ihat carry data.
ConstraintSystem sys_red(int i) {
    const int ih = i == 1 ? 2 : 1;
    const std::string Ri = "R" + std::to_string(i);
    const std::string Rh = "R" + std::to_string(ih);
    const std::string Rhd = Rh + "d";
    const std::string RDh = "RD" + std::to_string(ih);
    const Var vh = ih == 1 ? V1 : V2;
    const Var yh = ih == 1 ? Y1 : Y2;
    const Var yi = i == 1 ? Y1 : Y2;

    Builder b("SYS-RED-" + std::to_string(i), {"R1", "R2"}, {"Ra", Rhd, RDh});
    b.sys.collapse = i == 1 ? Collapse::collapse1 : Collapse::collapse2;
    b.add(R(Rh), Relation::eq, R("Ra") + R(Rhd), "split-" + std::to_string(ih));
    b.add(R(Ri), Relation::eq, R("Ra"), "split-" + std::to_string(i));
    b.add(R(Rh) + R(RDh), Relation::lt, I({U, vh}, {yh}), "decode-" + std::to_string(ih) + " total");
    b.add(R(Rhd) + R(RDh), Relation::lt, I({vh}, {yh}, {U}),
          "decode-" + std::to_string(ih) + " private");
    b.add(R(Ri), Relation::lt, I({U}, {yi}), "decode-" + std::to_string(i) + " cloud");
    b.add(R(RDh), Relation::ge, I({vh}, {Z}, {U}), "private secrecy-" + std::to_string(ih));
    b.nonneg({Rh, "Ra", Rhd, Ri, RDh});
    return b.done();
}

void old_gates(Builder& b, const std::array<std::string, 3>& tags) {
    b.add(I({V1}, {V2}, {V}), Relation::lt, marton_secrecy_bound(), "subject-to " + tags[0]);
    b.add(I({V, V1}, {Y1}, {U}), Relation::gt, I({V, V1}, {Z}, {U}), "subject-to " + tags[1] + " i=1");
    b.add(I({V, V2}, {Y2}, {U}), Relation::gt, I({V, V2}, {Z}, {U}), "subject-to " + tags[1] + " i=2");
    b.add(I({V1}, {Y1}, {V}), Relation::gt, I({V1}, {Z}, {V}), "subject-to " + tags[2] + " i=1");
    b.add(I({V2}, {Y2}, {V}), Relation::gt, I({V2}, {Z}, {V}), "subject-to " + tags[2] + " i=2");
}

ConstraintSystem reg_old() {
    Builder b("REG-OLD", {"R1", "R2"}, {});
    b.add(R("R1"), Relation::lt, total_bound(V1, Y1), "rate-1");
    b.add(R("R1") - R("R2"), Relation::lt, net_private(V1, Y1), "difference-1");
    b.add(R("R2"), Relation::lt, total_bound(V2, Y2), "rate-2");
    b.add(R("R2") - R("R1"), Relation::lt, net_private(V2, Y2), "difference-2");
    old_gates(b, {"(a)", "(b)", "(c)"});
    b.nonneg({"R1", "R2"});
    b.sys.notes.push_back(
        "A later proof cites the first three sub-labels of this display; the display only "
        "labels its subject-to lines, so all four rate constraints and all gates are stored.");
    return b.done();
}

ConstraintSystem reg_new2_0() {
    Builder b("REG-NEW2-0", {"R1", "R2"}, {});
    b.add(R("R1"), Relation::gt, cloud_secrecy(), "floor-1 (a)");
    b.add(R("R1"), Relation::lt, total_bound(V1, Y1), "rate-1 (b)");
    b.add(R("R1") - R("R2"), Relation::lt, net_private(V1, Y1), "difference-1 (c)");
    b.add(R("R2"), Relation::gt, cloud_secrecy(), "floor-2 (d)");
    b.add(R("R2"), Relation::lt, total_bound(V2, Y2), "rate-2 (e)");
    b.add(R("R2") - R("R1"), Relation::lt, net_private(V2, Y2), "difference-2 (f)");
    old_gates(b, {"(g)", "(h)", "(i)"});
    b.nonneg({"R1", "R2"});
    return b.done();
}

// REG-NEW2-0 without the floors and gates, evaluated with V_i = V = U.
ConstraintSystem reg_new2_i(int i) {
    Builder b("REG-NEW2-" + std::to_string(i), {"R1", "R2"}, {});
    b.sys.collapse = i == 1 ? Collapse::collapse1 : Collapse::collapse2;
    b.add(R("R1"), Relation::lt, total_bound(V1, Y1), "rate-1 (b)");
    b.add(R("R1") - R("R2"), Relation::lt, net_private(V1, Y1), "difference-1 (c)");
    b.add(R("R2"), Relation::lt, total_bound(V2, Y2), "rate-2 (e)");
    b.add(R("R2") - R("R1"), Relation::lt, net_private(V2, Y2), "difference-2 (f)");
    b.nonneg({"R1", "R2"});
    return b.done();
}

// Subregion reached by the substitution onto the R_i-free axis.
ConstraintSystem reg_sub(int i) {
    Builder b("REG-SUB-" + std::to_string(i), {"R1", "R2"}, {});
    const int ih = i == 1 ? 2 : 1;
    const std::string Ri = "R" + std::to_string(i);
    const std::string Rh = "R" + std::to_string(ih);
    const Var vh = ih == 1 ? V1 : V2;
    const Var yh = ih == 1 ? Y1 : Y2;
    const Var yi = i == 1 ? Y1 : Y2;
    b.add(R(Rh), Relation::lt, I({U}, {yh}) + net_private(vh, yh), "(a)");
    b.add(R(Rh) - R(Ri), Relation::lt, net_private(vh, yh), "(b)");
    b.add(R(Ri), Relation::lt, I({U}, {yi}), "(c)");
    b.add(R(Ri), Relation::lt, R(Rh), "(d)");
    b.nonneg({"R1", "R2"});
    return b.done();
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"SYS-OLD",    "SYS-OLDP",   "SYS-NEW1",   "SYS-NEW2",  "SYS-RED-1", "SYS-RED-2",
            "REG-OLD",    "REG-NEW2-0", "REG-NEW2-1", "REG-NEW2-2", "REG-SUB-1", "REG-SUB-2"};
}

bool is_preset(std::string_view name) {
    const auto names = preset_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

ConstraintSystem preset_system(std::string_view name) {
    if (name == "SYS-OLD") return sys_old();
    if (name == "SYS-OLDP") return sys_oldp();
    if (name == "SYS-NEW1") return sys_new1();
    if (name == "SYS-NEW2") return sys_new2();
    if (name == "SYS-RED-1") return sys_red(1);
    if (name == "SYS-RED-2") return sys_red(2);
    if (name == "REG-OLD") return reg_old();
    if (name == "REG-NEW2-0") return reg_new2_0();
    if (name == "REG-NEW2-1") return reg_new2_i(1);
    if (name == "REG-NEW2-2") return reg_new2_i(2);
    if (name == "REG-SUB-1") return reg_sub(1);
    if (name == "REG-SUB-2") return reg_sub(2);
    throw SystemError("unknown preset '" + std::string(name) + "'");
}

const std::vector<std::string>& default_elimination_order() {
    static const std::vector<std::string> order = {"Ra",  "Rb",  "R1c", "R1d", "R2c", "R2d",
                                                   "RD",  "RD1", "RD2", "RL1", "RL2"};
    return order;
}

}  // namespace bcsec
