#ifndef SEGFORGE_MANIFEST_HPP
#define SEGFORGE_MANIFEST_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace segforge {

// Dataset manifest: case id -> file paths (relative to the manifest file).
struct CaseEntry {
    std::string id;
    std::string image;                 // .svol or .nii
    std::optional<std::string> label;  // .sseg
    std::optional<std::string> hidden; // withheld full truth, evaluation only
};

struct Manifest {
    std::string dataset;
    std::string schema; // label vocabulary of the stored truths
    std::vector<CaseEntry> cases;
    std::map<std::string, std::string> provenance;

    const CaseEntry& find(const std::string& id) const;
};

void save_manifest(const Manifest& m, const std::string& path);
Manifest load_manifest(const std::string& path);

// Resolves a manifest-relative path against the manifest's directory.
std::string resolve_path(const std::string& manifest_path, const std::string& rel);

} // namespace segforge

#endif
