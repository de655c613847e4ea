#include "bcsec/dist_io.hpp"

#include <fstream>
#include <sstream>

namespace bcsec {

using nlohmann::json;

namespace {

void flatten(const json& node, std::vector<double>& out) {
    if (node.is_array()) {
        for (const auto& child : node) flatten(child, out);
    } else if (node.is_number()) {
        out.push_back(node.get<double>());
    } else {
        throw DistributionError("probability entries must be numbers");
    }
}

json nest(std::span<const double> flat, std::span<const std::size_t> dims) {
    if (dims.empty()) return flat.front();
    if (dims.size() == 1) return json(std::vector<double>(flat.begin(), flat.end()));
    const std::size_t chunk = flat.size() / dims.front();
    json arr = json::array();
    for (std::size_t i = 0; i < dims.front(); ++i)
        arr.push_back(nest(flat.subspan(i * chunk, chunk), dims.subspan(1)));
    return arr;
}

std::vector<Var> labels(const json& node) {
    std::vector<Var> out;
    if (node.is_string()) {
        out.push_back(parse_var(node.get<std::string>()));
    } else if (node.is_array()) {
        for (const auto& s : node) out.push_back(parse_var(s.get<std::string>()));
    } else if (!node.is_null()) {
        throw DistributionError("variable labels must be a string or a list of strings");
    }
    return out;
}

}  // namespace

JointDistribution joint_from_json(const json& doc) {
    if (!doc.contains("alphabets") || !doc.contains("factors"))
        throw DistributionError("distribution needs \"alphabets\" and \"factors\"");
    std::array<std::size_t, kNumVars> sizes{};
    std::array<Alphabet, kNumVars> alphabets;
    for (auto& [name, entry] : doc.at("alphabets").items()) {
        const Var v = parse_var(name);
        const auto s = entry.is_object() ? entry.at("size").get<long long>() : entry.get<long long>();
        if (s < 1) throw DistributionError("alphabet " + name + " must have size >= 1");
        sizes[std::size_t(v)] = std::size_t(s);
        alphabets[std::size_t(v)] = Alphabet::atomic(v, std::size_t(s));
        if (entry.is_object() && entry.contains("factors")) {
            const auto f = entry.at("factors").get<std::vector<std::size_t>>();
            alphabets[std::size_t(v)] = Alphabet::product(v, f);
            if (alphabets[std::size_t(v)].size != sizes[std::size_t(v)])
                throw DistributionError("alphabet " + name + " factors do not multiply to its size");
        }
    }
    for (std::size_t k = 0; k < kNumVars; ++k)
        if (sizes[k] == 0)
            throw DistributionError("alphabet for " + std::string(var_name(Var(k))) + " missing");

    std::vector<FactorTable> factors;
    for (const auto& f : doc.at("factors")) {
        FactorTable t;
        t.children = labels(f.at("child"));
        t.parents = labels(f.value("parents", json::array()));
        for (Var v : t.children) t.child_sizes.push_back(sizes[std::size_t(v)]);
        for (Var v : t.parents) t.parent_sizes.push_back(sizes[std::size_t(v)]);
        flatten(f.at("probs"), t.probs);
        factors.push_back(std::move(t));
    }
    return build_joint(std::move(factors), alphabets);
}

json joint_to_json(const JointDistribution& j) {
    json doc;
    json alph = json::object();
    for (Var v : kAllVars) {
        const auto& a = j.alphabet(v);
        if (a.is_product())
            alph[std::string(var_name(v))] = {{"size", a.size}, {"factors", a.factors}};
        else
            alph[std::string(var_name(v))] = a.size;
    }
    doc["alphabets"] = alph;
    json factors = json::array();
    for (const auto& f : j.factors()) {
        json entry;
        if (f.children.size() == 1) {
            entry["child"] = std::string(var_name(f.children.front()));
        } else {
            json c = json::array();
            for (Var v : f.children) c.push_back(std::string(var_name(v)));
            entry["child"] = c;
        }
        json p = json::array();
        for (Var v : f.parents) p.push_back(std::string(var_name(v)));
        entry["parents"] = p;
        std::vector<std::size_t> dims = f.parent_sizes;
        dims.insert(dims.end(), f.child_sizes.begin(), f.child_sizes.end());
        entry["probs"] = nest(f.probs, dims);
        factors.push_back(entry);
    }
    doc["factors"] = factors;
    return doc;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

JointDistribution load_joint(const std::filesystem::path& path) {
    return joint_from_json(json::parse(read_file(path)));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace bcsec
