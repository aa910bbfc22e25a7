#include "segforge/splits.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "segforge/errors.hpp"
#include "segforge/rng.hpp"

namespace segforge {

using nlohmann::json;

FoldPlan make_folds(std::vector<std::string> case_ids, std::uint64_t seed, int fold_count) {
    if (fold_count < 2) throw InvalidSpec("fold_count must be >= 2");
    if (static_cast<int>(case_ids.size()) < fold_count)
        throw TooFewCases("need at least " + std::to_string(fold_count) + " cases for " +
                          std::to_string(fold_count) + "-fold splitting");

    Rng rng(seed);
    rng.shuffle(case_ids);

    // cut into fold_count groups, remainder distributed to the earliest groups
    std::size_t n = case_ids.size();
    std::size_t base = n / static_cast<std::size_t>(fold_count);
    std::size_t rem = n % static_cast<std::size_t>(fold_count);
    std::vector<std::vector<std::string>> groups;
    std::size_t pos = 0;
    for (int g = 0; g < fold_count; ++g) {
        std::size_t len = base + (static_cast<std::size_t>(g) < rem ? 1 : 0);
        groups.emplace_back(case_ids.begin() + static_cast<std::ptrdiff_t>(pos),
                            case_ids.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
    }

    FoldPlan plan;
    plan.fold_count = fold_count;
    plan.seed = seed;
    for (int f = 0; f < fold_count; ++f) {
        Fold fold;
        fold.test_ids = groups[static_cast<std::size_t>(f)];
        fold.val_ids = groups[static_cast<std::size_t>((f + 1) % fold_count)];
        for (int g = 0; g < fold_count; ++g)
            if (g != f && g != (f + 1) % fold_count)
                fold.train_ids.insert(fold.train_ids.end(), groups[static_cast<std::size_t>(g)].begin(),
                                      groups[static_cast<std::size_t>(g)].end());
        plan.folds.push_back(std::move(fold));
    }
    return plan;
}

HoldoutPlan holdout_plan(std::vector<std::string> case_ids, int holdout_n,
                         std::vector<std::pair<std::string, std::string>> exclusions,
                         std::uint64_t seed) {
    if (holdout_n < 0) throw InvalidSpec("holdout count must be >= 0");

    HoldoutPlan plan;
    plan.seed = seed;
    plan.exclusions = std::move(exclusions);

    for (const auto& [id, reason] : plan.exclusions) {
        auto it = std::find(case_ids.begin(), case_ids.end(), id);
        if (it == case_ids.end())
            throw InvalidSpec("exclusion '" + id + "' (" + reason + ") is not a known case id");
        case_ids.erase(it);
    }
    if (static_cast<int>(case_ids.size()) < holdout_n)
        throw InsufficientCases("holdout of " + std::to_string(holdout_n) + " requested but only " +
                                std::to_string(case_ids.size()) + " cases remain after exclusions");

    Rng rng(seed);
    rng.shuffle(case_ids);
    plan.holdout_ids.assign(case_ids.begin(), case_ids.begin() + holdout_n);
    plan.train_ids.assign(case_ids.begin() + holdout_n, case_ids.end());
    return plan;
}

namespace {

json exclusions_to_json(const std::vector<std::pair<std::string, std::string>>& ex) {
    json j = json::array();
    for (const auto& [id, reason] : ex) j.push_back({{"id", id}, {"reason", reason}});
    return j;
}

std::vector<std::pair<std::string, std::string>> exclusions_from_json(const json& j) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : j) out.emplace_back(e.at("id").get<std::string>(), e.at("reason").get<std::string>());
    return out;
}

} // namespace

std::string to_json(const FoldPlan& plan) {
    json j;
    j["fold_count"] = plan.fold_count;
    j["seed"] = plan.seed;
    j["exclusions"] = exclusions_to_json(plan.exclusions);
    j["folds"] = json::array();
    for (const auto& f : plan.folds)
        j["folds"].push_back({{"train", f.train_ids}, {"val", f.val_ids}, {"test", f.test_ids}});
    return j.dump(2) + "\n";
}

FoldPlan fold_plan_from_json(const std::string& text) {
    json j = json::parse(text);
    FoldPlan plan;
    plan.fold_count = j.at("fold_count").get<int>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    plan.exclusions = exclusions_from_json(j.at("exclusions"));
    for (const auto& f : j.at("folds")) {
        Fold fold;
        fold.train_ids = f.at("train").get<std::vector<std::string>>();
        fold.val_ids = f.at("val").get<std::vector<std::string>>();
        fold.test_ids = f.at("test").get<std::vector<std::string>>();
        plan.folds.push_back(std::move(fold));
    }
    return plan;
}

void save_fold_plan(const FoldPlan& plan, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << to_json(plan);
    if (!f) throw IoError("short write to " + path);
}

FoldPlan load_fold_plan(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return fold_plan_from_json(text);
}

std::string to_json(const HoldoutPlan& plan) {
    json j;
    j["seed"] = plan.seed;
    j["exclusions"] = exclusions_to_json(plan.exclusions);
    j["train"] = plan.train_ids;
    j["holdout"] = plan.holdout_ids;
    return j.dump(2) + "\n";
}

HoldoutPlan holdout_plan_from_json(const std::string& text) {
    json j = json::parse(text);
    HoldoutPlan plan;
    plan.seed = j.at("seed").get<std::uint64_t>();
    plan.exclusions = exclusions_from_json(j.at("exclusions"));
    plan.train_ids = j.at("train").get<std::vector<std::string>>();
    plan.holdout_ids = j.at("holdout").get<std::vector<std::string>>();
    return plan;
}

} // namespace segforge
