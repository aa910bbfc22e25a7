#include "segforge/manifest.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "segforge/errors.hpp"

namespace segforge {

using nlohmann::json;
namespace fs = std::filesystem;

const CaseEntry& Manifest::find(const std::string& id) const {
    for (const auto& c : cases)
        if (c.id == id) return c;
    throw InvalidSpec("case id '" + id + "' not in manifest for dataset '" + dataset + "'");
}

void save_manifest(const Manifest& m, const std::string& path) {
    json j;
    j["dataset"] = m.dataset;
    j["schema"] = m.schema;
    j["provenance"] = m.provenance;
    j["cases"] = json::array();
    for (const auto& c : m.cases) {
        json e;
        e["id"] = c.id;
        e["image"] = c.image;
        if (c.label) e["label"] = *c.label;
        if (c.hidden) e["hidden"] = *c.hidden;
        j["cases"].push_back(std::move(e));
    }
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << j.dump(2) << "\n";
    if (!f) throw IoError("short write to " + path);
}

Manifest load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    json j = json::parse(f, nullptr, true);
    Manifest m;
    m.dataset = j.at("dataset").get<std::string>();
    m.schema = j.value("schema", std::string());
    if (j.contains("provenance"))
        for (auto& [k, v] : j["provenance"].items()) m.provenance[k] = v.get<std::string>();
    for (const auto& e : j.at("cases")) {
        CaseEntry c;
        c.id = e.at("id").get<std::string>();
        c.image = e.at("image").get<std::string>();
        if (e.contains("label")) c.label = e["label"].get<std::string>();
        if (e.contains("hidden")) c.hidden = e["hidden"].get<std::string>();
        m.cases.push_back(std::move(c));
    }
    return m;
}

std::string resolve_path(const std::string& manifest_path, const std::string& rel) {
    fs::path p(rel);
    if (p.is_absolute()) return rel;
    return (fs::path(manifest_path).parent_path() / p).string();
}

} // namespace segforge
