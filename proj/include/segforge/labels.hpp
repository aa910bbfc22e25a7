#ifndef SEGFORGE_LABELS_HPP
#define SEGFORGE_LABELS_HPP

#include <string>
#include <vector>

#include "segforge/volume.hpp"

namespace segforge {

// Ordered organ list; ids are 1-based and contiguous, id 0 is background.
class Taxonomy {
public:
    explicit Taxonomy(std::vector<std::string> names);

    // The 22-organ default: lung_l, lung_r, heart, liver, spleen, kidney_r,
    // kidney_l, stomach, pancreas, bladder, gallbladder, thyroid, spine,
    // ribs_r, ribs_l, clavicles, sternum, scapulas, pelvis, arm, femur, body.
    static const Taxonomy& default22();

    int size() const { return static_cast<int>(names_.size()); }
    bool contains(int id) const { return id >= 1 && id <= size(); }
    const std::string& name(int id) const;
    int id_of(const std::string& name) const; // 0 if unknown

private:
    std::vector<std::string> names_;
};

// A dataset label vocabulary: named groups of taxonomy organ ids. Each organ
// belongs to at most one group; the union of groups is the covered set. The
// canonical id of a group is its smallest member.
class LabelSchema {
public:
    struct Group {
        std::string label;
        std::vector<int> organ_ids;
    };

    LabelSchema(std::string name, std::vector<Group> groups, const Taxonomy& tax);

    const std::string& name() const { return name_; }
    const std::vector<Group>& groups() const { return groups_; }

    bool covers(int id) const { return id >= 1 && id < static_cast<int>(canonical_.size()) && canonical_[id] != 0; }
    int canonical_of(int id) const { return covers(id) ? canonical_[id] : 0; }
    std::vector<int> covered_ids() const;
    std::vector<int> canonical_ids() const;
    const std::string& group_label_of(int canonical_id) const;

    // Text format: "schema: NAME" first, then one "label: organ, organ" line
    // per group. '#' starts a comment.
    static LabelSchema parse(const std::string& text, const Taxonomy& tax);
    static LabelSchema load(const std::string& path, const Taxonomy& tax);
    std::string serialize() const;

    // Shipped defaults: "xcat22" (identity over all 22 organs), "ctorg7"
    // (7 labels covering 9 organs, bones = spine+ribs), "synth4" (desk-scale
    // partial schema over the first 4 organs with one grouped pair).
    static LabelSchema builtin(const std::string& name, const Taxonomy& tax);
    // Resolves a --schema argument: an existing file path wins, else builtin.
    static LabelSchema resolve(const std::string& name_or_path, const Taxonomy& tax);

private:
    std::string name_;
    std::vector<Group> groups_;
    std::vector<int> canonical_; // organ id -> canonical id, 0 = uncovered
};

// Keeps a canonical id for covered organs, zeroes everything else.
Segmentation project_to_schema(const Segmentation& seg, const LabelSchema& schema, const Taxonomy& tax);

// True annotations win for covered organs (including their negative space);
// pseudo labels only fill organs the schema never annotates.
Segmentation fuse_pseudo(const Segmentation& true_seg, const Segmentation& pseudo_seg,
                         const LabelSchema& schema);

} // namespace segforge

#endif
