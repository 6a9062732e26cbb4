#include "reparam/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace reparam {

namespace {

ordered_json target_to_json(const TargetManifold& t) {
    ordered_json j;
    j["tag"] = target_tag_string(t);
    j["dim"] = t.dim;
    return j;
}

TargetManifold target_from_json(const ordered_json& j) {
    const std::string tag = j.at("tag").get<std::string>();
    if (tag == "unit_sphere") return TargetManifold::unit_sphere();
    if (tag == "flat_torus") return TargetManifold::flat_torus();
    if (tag == "ambient") return TargetManifold::ambient(j.at("dim").get<int>());
    throw std::invalid_argument("unknown target tag: " + tag);
}

}  // namespace

std::string target_tag_string(const TargetManifold& t) {
    switch (t.tag) {
        case TargetManifold::Tag::unit_sphere_in_R3: return "unit_sphere";
        case TargetManifold::Tag::flat_torus_in_R4: return "flat_torus";
        case TargetManifold::Tag::ambient_Rm: return "ambient";
    }
    return "unknown";
}

ordered_json map_to_json(const DiscreteMap& f) {
    ordered_json j;
    j["mesh_level"] = f.mesh->level;
    j["target"] = target_to_json(f.target);
    j["values"] = f.values;
    return j;
}

DiscreteMap map_from_json(const ordered_json& j) {
    DiscreteMap f;
    f.mesh = make_mesh(j.at("mesh_level").get<int>());
    f.target = target_from_json(j.at("target"));
    f.values = j.at("values").get<std::vector<double>>();
    const std::size_t expected = f.mesh->vertices.size() * static_cast<std::size_t>(f.target.dim);
    if (f.values.size() != expected) {
        throw std::invalid_argument("map values length does not match mesh and target");
    }
    return f;
}

ordered_json element_to_json(const MobiusElement& g) {
    const auto r = g.to_reals();
    return ordered_json(std::vector<double>(r.begin(), r.end()));
}

MobiusElement element_from_json(const ordered_json& j) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != 8) throw std::invalid_argument("group element needs 8 reals");
    std::array<double, 8> r{};
    std::copy(v.begin(), v.end(), r.begin());
    return MobiusElement::from_reals(r);
}

ordered_json report_to_json(const ExperimentReport& report) {
    ordered_json j;
    j["experiment"] = report.experiment;
    j["version"] = kToolVersion;
    j["seed"] = report.seed;
    ordered_json params = ordered_json::object();
    for (const auto& [key, value] : report.parameters) params[key] = value;
    j["parameters"] = params;
    j["steps"]["columns"] = report.steps.columns;
    j["steps"]["rows"] = report.steps.rows;
    ordered_json witnesses = ordered_json::object();
    for (const auto& [name, reals] : report.witnesses) {
        witnesses[name] = std::vector<double>(reals.begin(), reals.end());
    }
    j["witnesses"] = witnesses;
    j["pass"] = report.pass;
    j["verdict"] = report.verdict;
    return j;
}

std::string report_to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    for (std::size_t c = 0; c < report.steps.columns.size(); ++c) {
        if (c) out << ',';
        out << report.steps.columns[c];
    }
    out << '\n';
    for (const auto& row : report.steps.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << ordered_json(row[c]).dump();
        }
        out << '\n';
    }
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("short write: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace reparam
