#include "segforge/labels.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace segforge {

Taxonomy::Taxonomy(std::vector<std::string> names) : names_(std::move(names)) {
    std::set<std::string> seen;
    for (const auto& n : names_) {
        if (n.empty()) throw InvalidSpec("taxonomy organ name empty");
        if (!seen.insert(n).second) throw InvalidSpec("duplicate taxonomy organ name: " + n);
    }
}

const Taxonomy& Taxonomy::default22() {
    static const Taxonomy tax({
        "lung_l", "lung_r", "heart", "liver", "spleen", "kidney_r", "kidney_l",
        "stomach", "pancreas", "bladder", "gallbladder", "thyroid", "spine",
        "ribs_r", "ribs_l", "clavicles", "sternum", "scapulas", "pelvis",
        "arm", "femur", "body",
    });
    return tax;
}

const std::string& Taxonomy::name(int id) const {
    if (!contains(id)) throw UnknownLabel("organ id " + std::to_string(id) + " outside taxonomy");
    return names_[static_cast<std::size_t>(id - 1)];
}

int Taxonomy::id_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<int>(i + 1);
    return 0;
}

LabelSchema::LabelSchema(std::string name, std::vector<Group> groups, const Taxonomy& tax)
    : name_(std::move(name)), groups_(std::move(groups)), canonical_(static_cast<std::size_t>(tax.size()) + 1, 0) {
    if (name_.empty()) throw InvalidSpec("schema name empty");
    if (groups_.empty()) throw InvalidSpec("schema " + name_ + " covers nothing");
    for (auto& g : groups_) {
        if (g.organ_ids.empty()) throw InvalidSpec("schema group '" + g.label + "' is empty");
        int canon = *std::min_element(g.organ_ids.begin(), g.organ_ids.end());
        for (int id : g.organ_ids) {
            if (!tax.contains(id))
                throw UnknownLabel("schema group '" + g.label + "' references organ id " + std::to_string(id));
            if (canonical_[static_cast<std::size_t>(id)] != 0)
                throw InvalidSpec("organ " + tax.name(id) + " appears in more than one schema group");
            canonical_[static_cast<std::size_t>(id)] = canon;
        }
    }
}

std::vector<int> LabelSchema::covered_ids() const {
    std::vector<int> out;
    for (std::size_t id = 1; id < canonical_.size(); ++id)
        if (canonical_[id] != 0) out.push_back(static_cast<int>(id));
    return out;
}

std::vector<int> LabelSchema::canonical_ids() const {
    std::vector<int> out;
    for (const auto& g : groups_) out.push_back(*std::min_element(g.organ_ids.begin(), g.organ_ids.end()));
    std::sort(out.begin(), out.end());
    return out;
}

const std::string& LabelSchema::group_label_of(int canonical_id) const {
    for (const auto& g : groups_)
        if (*std::min_element(g.organ_ids.begin(), g.organ_ids.end()) == canonical_id) return g.label;
    throw UnknownLabel("no schema group with canonical id " + std::to_string(canonical_id));
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_names(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

} // namespace

LabelSchema LabelSchema::parse(const std::string& text, const Taxonomy& tax) {
    std::istringstream in(text);
    std::string line, name;
    std::vector<Group> groups;
    while (std::getline(in, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t colon = line.find(':');
        if (colon == std::string::npos)
            throw InvalidSpec("schema line without ':': " + line);
        std::string key = trim(line.substr(0, colon));
        std::string val = trim(line.substr(colon + 1));
        if (key == "schema") {
            name = val;
            continue;
        }
        Group g;
        g.label = key;
        for (const auto& organ : split_names(val)) {
            int id = tax.id_of(organ);
            if (id == 0) throw UnknownLabel("schema references unknown organ '" + organ + "'");
            g.organ_ids.push_back(id);
        }
        groups.push_back(std::move(g));
    }
    if (name.empty()) throw InvalidSpec("schema file missing 'schema: NAME' line");
    return LabelSchema(name, std::move(groups), tax);
}

LabelSchema LabelSchema::load(const std::string& path, const Taxonomy& tax) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open schema file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), tax);
}

std::string LabelSchema::serialize() const {
    std::ostringstream out;
    out << "schema: " << name_ << "\n";
    const Taxonomy& tax = Taxonomy::default22();
    for (const auto& g : groups_) {
        out << g.label << ":";
        for (std::size_t i = 0; i < g.organ_ids.size(); ++i)
            out << (i ? ", " : " ") << tax.name(g.organ_ids[i]);
        out << "\n";
    }
    return out.str();
}

LabelSchema LabelSchema::builtin(const std::string& name, const Taxonomy& tax) {
    if (name == "xcat22") {
        std::vector<Group> groups;
        for (int id = 1; id <= tax.size(); ++id) groups.push_back({tax.name(id), {id}});
        return LabelSchema("xcat22", std::move(groups), tax);
    }
    if (name == "ctorg7") {
        // The 7-label vocabulary: sided lungs/kidneys, liver, bladder, and a
        // grouped "bones" label for spine + both rib cages.
        std::vector<Group> groups = {
            {"lung_l", {tax.id_of("lung_l")}},
            {"lung_r", {tax.id_of("lung_r")}},
            {"liver", {tax.id_of("liver")}},
            {"kidney_r", {tax.id_of("kidney_r")}},
            {"kidney_l", {tax.id_of("kidney_l")}},
            {"bladder", {tax.id_of("bladder")}},
            {"bones", {tax.id_of("spine"), tax.id_of("ribs_r"), tax.id_of("ribs_l")}},
        };
        return LabelSchema("ctorg7", std::move(groups), tax);
    }
    if (name == "synth4") {
        std::vector<Group> groups = {
            {"lungs", {tax.id_of("lung_l"), tax.id_of("lung_r")}},
            {"heart", {tax.id_of("heart")}},
            {"liver", {tax.id_of("liver")}},
        };
        return LabelSchema("synth4", std::move(groups), tax);
    }
    throw InvalidSpec("unknown builtin schema '" + name + "'");
}

LabelSchema LabelSchema::resolve(const std::string& name_or_path, const Taxonomy& tax) {
    std::ifstream f(name_or_path);
    if (f) {
        std::stringstream ss;
        ss << f.rdbuf();
        return parse(ss.str(), tax);
    }
    return builtin(name_or_path, tax);
}

Segmentation project_to_schema(const Segmentation& seg, const LabelSchema& schema, const Taxonomy& tax) {
    validate(seg);
    Segmentation out = seg;
    for (auto& l : out.labels) {
        if (l == 0) continue;
        if (!tax.contains(l)) throw UnknownLabel("label id " + std::to_string(l) + " outside taxonomy");
        l = static_cast<std::uint8_t>(schema.canonical_of(l));
    }
    return out;
}

Segmentation fuse_pseudo(const Segmentation& true_seg, const Segmentation& pseudo_seg,
                         const LabelSchema& schema) {
    if (!same_geometry(true_seg, pseudo_seg))
        throw GeometryMismatch("fuse_pseudo inputs differ in geometry");
    Segmentation out = true_seg;
    for (std::size_t i = 0; i < out.labels.size(); ++i) {
        std::uint8_t t = true_seg.labels[i];
        if (t != 0) {
            if (!schema.covers(t))
                throw SchemaViolation("true label " + std::to_string(t) + " not covered by schema " + schema.name());
            continue; // true annotation is authoritative
        }
        std::uint8_t p = pseudo_seg.labels[i];
        // Covered organs are already fully annotated; a covered pseudo id on a
        // true-background voxel is contradicted by the annotation.
        out.labels[i] = (p != 0 && !schema.covers(p)) ? p : 0;
    }
    return out;
}

} // namespace segforge
