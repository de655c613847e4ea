#include "bcsec/system_io.hpp"

#include <algorithm>
#include <set>

#include "bcsec/dist_io.hpp"

namespace bcsec {

using nlohmann::json;

namespace {

Rational integer(const json& node) {
    if (node.is_number_integer()) return Rational(node.get<long long>());
    if (node.is_string()) {
        boost::multiprecision::cpp_int v(node.get<std::string>());
        return Rational(v);
    }
    throw SystemError("rational parts must be integers or integer strings");
}

Rational ratio(const json& node) {
    const Rational num = integer(node.at("num"));
    const Rational den = node.contains("den") ? integer(node.at("den")) : Rational(1);
    if (den == 0) throw SystemError("zero denominator");
    return num / den;
}

json ratio_json(const Rational& r) {
    const auto num = numerator(r);
    const auto den = denominator(r);
    json out;
    if (abs(num) < (boost::multiprecision::cpp_int(1) << 62)) {
        out["num"] = num.convert_to<long long>();
        out["den"] = den.convert_to<long long>();
    } else {
        out["num"] = num.str();
        out["den"] = den.str();
    }
    return out;
}

VarSet varset(const json& node) {
    if (node.is_null()) return {};
    if (node.is_string()) return VarSet::parse(node.get<std::string>());
    VarSet s;
    for (const auto& v : node) s = s | VarSet{parse_var(v.get<std::string>())};
    return s;
}

Constraint constraint_from_json(const json& node) {
    Constraint c;
    c.label = node.value("label", "");
    c.relation = parse_relation(node.value("relation", "<="));
    for (const auto& r : node.value("rates", json::array()))
        c.expr.add_rate(r.at("var").get<std::string>(), ratio(r));
    for (const auto& t : node.value("infos", json::array()))
        c.expr.add_info(InfoTerm::make(varset(t.at("A")), varset(t.at("B")),
                                       varset(t.value("C", json()))),
                        ratio(t));
    if (node.contains("constant")) c.expr.add_constant(ratio(node.at("constant")));
    if (node.value("gate", false) && c.expr.has_rates())
        throw SystemError("constraint '" + c.label + "' is marked as a gate but has rates");
    if (node.contains("certificate"))
        for (const auto& e : node.at("certificate"))
            c.certificate.emplace(e.at("index").get<std::size_t>(), ratio(e));
    return c;
}

std::vector<std::string> names(const json& node) {
    std::vector<std::string> out;
    for (const auto& v : node) out.push_back(v.get<std::string>());
    return out;
}

}  // namespace

json constraint_to_json(const Constraint& c) {
    json out;
    out["label"] = c.label;
    out["relation"] = std::string(relation_symbol(c.relation));
    json rates = json::array();
    for (const auto& [var, coef] : c.expr.rates) {
        json r = ratio_json(coef);
        r["var"] = var;
        rates.push_back(r);
    }
    out["rates"] = rates;
    json infos = json::array();
    for (const auto& [term, coef] : c.expr.infos) {
        json t = ratio_json(coef);
        t["A"] = term.a.to_string();
        t["B"] = term.b.to_string();
        t["C"] = term.c.to_string();
        infos.push_back(t);
    }
    out["infos"] = infos;
    out["constant"] = ratio_json(c.expr.constant);
    out["gate"] = c.is_gate();
    out["text"] = c.to_string();
    if (!c.certificate.empty()) {
        json cert = json::array();
        for (const auto& [idx, lambda] : c.certificate) {
            json e = ratio_json(lambda);
            e["index"] = idx;
            cert.push_back(e);
        }
        out["certificate"] = cert;
    }
    return out;
}

json system_to_json(const ConstraintSystem& system) {
    json out;
    out["name"] = system.name;
    out["free"] = system.free_vars;
    out["bound"] = system.bound_vars;
    out["collapse"] = std::string(collapse_name(system.collapse));
    json cs = json::array();
    for (const auto& c : system.constraints) cs.push_back(constraint_to_json(c));
    out["constraints"] = cs;
    if (!system.basis.empty()) {
        json basis = json::array();
        for (const auto& c : system.basis) basis.push_back(constraint_to_json(c));
        out["basis"] = basis;
    }
    if (!system.notes.empty()) out["notes"] = system.notes;
    return out;
}

ConstraintSystem system_from_json(const json& doc) {
    ConstraintSystem sys;
    if (doc.is_array()) {
        sys.name = "file";
        sys.free_vars = {"R1", "R2"};
        std::set<std::string> bound;
        for (const auto& node : doc) {
            sys.constraints.push_back(constraint_from_json(node));
            for (const auto& [var, coef] : sys.constraints.back().expr.rates)
                if (var != "R1" && var != "R2") bound.insert(var);
        }
        for (const auto& v : default_elimination_order())
            if (bound.erase(v)) sys.bound_vars.push_back(v);
        sys.bound_vars.insert(sys.bound_vars.end(), bound.begin(), bound.end());
    } else if (doc.is_object()) {
        sys.name = doc.value("name", "file");
        sys.free_vars = doc.contains("free") ? names(doc.at("free"))
                                             : std::vector<std::string>{"R1", "R2"};
        if (doc.contains("bound")) sys.bound_vars = names(doc.at("bound"));
        sys.collapse = parse_collapse(doc.value("collapse", "none"));
        for (const auto& node : doc.at("constraints"))
            sys.constraints.push_back(constraint_from_json(node));
        if (doc.contains("basis"))
            for (const auto& node : doc.at("basis")) sys.basis.push_back(constraint_from_json(node));
        if (doc.contains("notes")) sys.notes = names(doc.at("notes"));
    } else {
        throw SystemError("system file must be a list or an object");
    }
    sys.validate();
    return sys;
}

ConstraintSystem resolve_system(const std::string& name, FmOptions options) {
    if (name.size() > 4 && name.starts_with("FM(") && name.back() == ')')
        return fm_eliminate(resolve_system(name.substr(3, name.size() - 4), options), options);
    if (is_preset(name)) return preset_system(name);
    const std::filesystem::path path(name);
    if (!std::filesystem::exists(path))
        throw SystemError("unknown system '" + name + "' (not a preset and no such file)");
    auto sys = system_from_json(json::parse(read_file(path)));
    if (sys.name == "file") sys.name = path.filename().string();
    return sys;
}

}  // namespace bcsec
