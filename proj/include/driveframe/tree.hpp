#pragma once

#include "driveframe/smote.hpp"

#include <string>
#include <vector>

namespace driveframe {

// One node of the CART tree, stored flat in preorder. Children always sit
// at a higher index than their parent, which rules out cycles.
struct TreeNode {
    bool is_leaf = true;
    Label label = Label::Sober;
    std::array<std::size_t, 2> class_counts{};  // [Sober, Influenced]
    int feature = -1;                           // split feature index
    double threshold = 0.0;                     // left: value < t, right: value >= t
    int left = -1;
    int right = -1;
};

struct DecisionTreeModel {
    std::vector<TreeNode> nodes;
    Standardization standardization;
    TrainConfig train_config;

    void validate() const;  // structural integrity; throws on a dangling child
    int depth() const;
};

struct PathStep {
    std::string feature;
    std::string comparison;  // "<" or ">="
    double threshold;

    bool operator==(const PathStep&) const = default;
};

struct Prediction {
    Label label;
    std::array<std::size_t, 2> leaf_counts{};
    std::vector<PathStep> path;
};

// Gini impurity decrease of splitting (n_sober, n_influenced) into the two
// given child count pairs. Shared with the brute-force oracle in tests so
// tie comparisons are bit-identical.
double gini_decrease(std::size_t parent_sober, std::size_t parent_influenced,
                     std::size_t left_sober, std::size_t left_influenced);

// CART trainer: candidate thresholds are midpoints between consecutive
// distinct sorted feature values; the split with the greatest impurity
// decrease wins, ties broken by lowest feature index then lowest threshold.
// Majority-tie leaves go to Influenced, the safety-conservative class.
DecisionTreeModel train_tree(const LabeledDataset& data, const TrainConfig& cfg);

Prediction predict(const DecisionTreeModel& model, const TripFeatures& f);

// Portable JSON model format, version-checked on load.
std::string save_model(const DecisionTreeModel& model);
DecisionTreeModel load_model(const std::string& bytes);

inline constexpr int kModelFormatVersion = 1;

} // namespace driveframe
