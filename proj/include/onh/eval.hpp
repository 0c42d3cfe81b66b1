#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "onh/core.hpp"

namespace onh::eval {

enum Partition : int { kTrain = 0, kVal = 1, kTest = 2 };

struct Dataset {
    std::vector<std::string> ids;  // unique
    std::vector<int> labels;       // 0 robust, 1 fragile

    std::size_t size() const { return ids.size(); }
};

struct SplitAssignment {
    std::vector<int> partition;  // Partition per sample, aligned with the dataset
    std::uint64_t seed = 0;
    int fold = -1;  // set by kfold

    std::vector<std::size_t> members(int part) const;
};

/// Stratified 70/15/15 split (label-wise shuffling plus largest-remainder
/// count allocation, so proportions stay within one sample of the target
/// both globally and per class). Deterministic in (ids, seed) regardless
/// of input order.
SplitAssignment split(const Dataset& data, std::array<double, 3> fractions = {0.70, 0.15, 0.15},
                      std::uint64_t seed = 0);

/// Stratified k-fold: every sample is in the test partition of exactly one
/// fold; each fold's remainder is re-split 70/15 train/val relative to the
/// whole, matching the flat split scheme.
std::vector<SplitAssignment> kfold(const Dataset& data, int folds = 5, std::uint64_t seed = 0);

struct RocResult {
    std::vector<double> thresholds;                 // descending, one per curve step
    std::vector<std::pair<double, double>> points;  // (FPR, TPR), from (0,0) to (1,1)
    double auc = 0.0;
};

/// Trapezoidal ROC/AUC over the full threshold sweep; tied scores move
/// diagonally (0.5 pairwise credit, identical to Mann-Whitney U).
RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// (mean, sample standard deviation with n-1 denominator); needs >= 2.
std::pair<double, double> aggregate(const std::vector<double>& per_fold_values);

}  // namespace onh::eval
