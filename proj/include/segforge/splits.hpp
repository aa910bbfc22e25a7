#ifndef SEGFORGE_SPLITS_HPP
#define SEGFORGE_SPLITS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace segforge {

struct Fold {
    std::vector<std::string> train_ids, val_ids, test_ids;
    bool operator==(const Fold&) const = default;
};

// Rotation-based k-fold: ids are shuffled once by seed and cut into k groups
// (remainder to the earliest groups); fold f tests on group f and validates on
// group (f+1) mod k, so every id lands in exactly one test set.
struct FoldPlan {
    int fold_count = 5;
    std::uint64_t seed = 0;
    std::vector<Fold> folds;
    std::vector<std::pair<std::string, std::string>> exclusions; // id, reason
    bool operator==(const FoldPlan&) const = default;
};

FoldPlan make_folds(std::vector<std::string> case_ids, std::uint64_t seed, int fold_count = 5);

struct HoldoutPlan {
    std::uint64_t seed = 0;
    std::vector<std::string> train_ids, holdout_ids;
    std::vector<std::pair<std::string, std::string>> exclusions;
    bool operator==(const HoldoutPlan&) const = default;
};

HoldoutPlan holdout_plan(std::vector<std::string> case_ids, int holdout_n,
                         std::vector<std::pair<std::string, std::string>> exclusions,
                         std::uint64_t seed);

std::string to_json(const FoldPlan& plan);
FoldPlan fold_plan_from_json(const std::string& text);
void save_fold_plan(const FoldPlan& plan, const std::string& path);
FoldPlan load_fold_plan(const std::string& path);

std::string to_json(const HoldoutPlan& plan);
HoldoutPlan holdout_plan_from_json(const std::string& text);

} // namespace segforge

#endif
