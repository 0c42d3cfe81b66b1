#include "onh/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace onh::eval {

std::vector<std::size_t> SplitAssignment::members(int part) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < partition.size(); ++i)
        if (partition[i] == part) out.push_back(i);
    return out;
}

namespace {

void check_dataset(const Dataset& data) {
    require(data.ids.size() == data.labels.size(), "dataset: ids and labels differ in count");
    std::set<std::string> seen;
    for (const auto& id : data.ids)
        require(seen.insert(id).second, "dataset: duplicate id '" + id + "'");
    for (int l : data.labels) require(l == 0 || l == 1, "dataset: labels must be 0 or 1");
}

/// Sample indices per class, ordered by id then shuffled; sorting first
/// makes the result a function of (ids, seed), not of input order.
std::vector<std::vector<std::size_t>> shuffled_class_lists(const Dataset& data, Rng& rng) {
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return data.ids[a] < data.ids[b]; });
    std::vector<std::vector<std::size_t>> classes(2);
    for (std::size_t i : order) classes[static_cast<std::size_t>(data.labels[i])].push_back(i);
    for (auto& members : classes) {
        for (std::size_t i = members.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.below(i));
            std::swap(members[i - 1], members[j]);
        }
    }
    return classes;
}

/// Largest-remainder target counts for n samples over the fractions.
std::vector<std::size_t> global_targets(std::size_t n, const std::vector<double>& fractions) {
    std::vector<std::size_t> counts(fractions.size());
    std::vector<std::pair<double, std::size_t>> rema(fractions.size());
    std::size_t assigned = 0;
    for (std::size_t p = 0; p < fractions.size(); ++p) {
        const double ideal = fractions[p] * static_cast<double>(n);
        counts[p] = static_cast<std::size_t>(std::floor(ideal));
        rema[p] = {ideal - std::floor(ideal), p};
        assigned += counts[p];
    }
    std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned) counts[rema[i % rema.size()].second] += 1;
    return counts;
}

/// Stratified allocation: per class, floor counts plus remainders pushed
/// to the globally most-deficient partition. Hits the global targets
/// exactly while keeping every class within one sample of proportional.
std::vector<int> stratified_assign(const Dataset& data, const std::vector<double>& fractions,
                                   Rng& rng) {
    const auto classes = shuffled_class_lists(data, rng);
    const auto targets = global_targets(data.size(), fractions);
    std::vector<std::size_t> allocated(fractions.size(), 0);
    std::vector<int> partition(data.size(), -1);

    for (const auto& members : classes) {
        if (members.empty()) continue;
        std::vector<std::size_t> counts(fractions.size());
        std::size_t assigned = 0;
        for (std::size_t p = 0; p < fractions.size(); ++p) {
            counts[p] = static_cast<std::size_t>(
                std::floor(fractions[p] * static_cast<double>(members.size())));
            assigned += counts[p];
        }
        while (assigned < members.size()) {
            std::size_t best = 0;
            long long best_deficit = -1;
            for (std::size_t p = 0; p < fractions.size(); ++p) {
                const long long deficit = static_cast<long long>(targets[p]) -
                                          static_cast<long long>(allocated[p] + counts[p]);
                if (deficit > best_deficit) {
                    best_deficit = deficit;
                    best = p;
                }
            }
            counts[best] += 1;
            assigned += 1;
        }
        std::size_t cursor = 0;
        for (std::size_t p = 0; p < fractions.size(); ++p) {
            for (std::size_t i = 0; i < counts[p]; ++i)
                partition[members[cursor++]] = static_cast<int>(p);
            allocated[p] += counts[p];
        }
    }
    return partition;
}

}  // namespace

SplitAssignment split(const Dataset& data, std::array<double, 3> fractions, std::uint64_t seed) {
    check_dataset(data);
    require(data.size() >= 3, "split: need at least 3 samples");
    double total = 0.0;
    for (double f : fractions) {
        require(f >= 0.0, "split: negative fraction");
        total += f;
    }
    require(std::abs(total - 1.0) < 1e-9, "split: fractions must sum to 1");
    std::array<std::size_t, 2> class_count{0, 0};
    for (int l : data.labels) class_count[static_cast<std::size_t>(l)] += 1;
    for (int c = 0; c < 2; ++c)
        require(class_count[static_cast<std::size_t>(c)] >= 3,
                "split: cannot stratify, class " + std::to_string(c) + " has fewer than 3 samples");

    Rng rng(seed);
    SplitAssignment out;
    out.seed = seed;
    out.partition = stratified_assign(data, {fractions[0], fractions[1], fractions[2]}, rng);
    return out;
}

std::vector<SplitAssignment> kfold(const Dataset& data, int folds, std::uint64_t seed) {
    check_dataset(data);
    require(folds >= 2, "kfold: need at least 2 folds");
    require(data.size() >= static_cast<std::size_t>(folds), "kfold: dataset smaller than fold count");

    Rng rng(seed);
    const auto classes = shuffled_class_lists(data, rng);

    // deal each class round-robin over the folds
    std::vector<int> fold_of(data.size(), -1);
    for (const auto& members : classes)
        for (std::size_t i = 0; i < members.size(); ++i)
            fold_of[members[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));

    // within each fold, the remainder re-splits 70/15 relative to the whole
    const double train_frac = 0.70 / 0.85;
    std::vector<SplitAssignment> out;
    for (int f = 0; f < folds; ++f) {
        Dataset rest;
        std::vector<std::size_t> rest_index;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (fold_of[i] == f) continue;
            rest.ids.push_back(data.ids[i]);
            rest.labels.push_back(data.labels[i]);
            rest_index.push_back(i);
        }
        Rng fold_rng = rng.fork(static_cast<std::uint64_t>(f) + 1);
        const std::vector<int> rest_partition =
            stratified_assign(rest, {train_frac, 1.0 - train_frac}, fold_rng);

        SplitAssignment assignment;
        assignment.seed = seed;
        assignment.fold = f;
        assignment.partition.assign(data.size(), kTest);
        for (std::size_t r = 0; r < rest_index.size(); ++r)
            assignment.partition[rest_index[r]] = rest_partition[r] == 0 ? kTrain : kVal;
        out.push_back(std::move(assignment));
    }
    return out;
}

RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    require(scores.size() == labels.size(), "roc_auc: scores and labels differ in count");
    require(!scores.empty(), "roc_auc: empty input");
    std::size_t pos = 0, neg = 0;
    for (int l : labels) {
        require(l == 0 || l == 1, "roc_auc: labels must be 0 or 1");
        (l ? pos : neg) += 1;
    }
    require(pos > 0 && neg > 0, "roc_auc: both classes must be present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    RocResult res;
    res.points.emplace_back(0.0, 0.0);
    std::size_t tp = 0, fp = 0;
    double area2 = 0.0;  // twice the area, accumulated per step
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        std::size_t tie_pos = 0, tie_neg = 0;
        while (i < order.size() && scores[order[i]] == s) {
            (labels[order[i]] ? tie_pos : tie_neg) += 1;
            ++i;
        }
        const double x0 = static_cast<double>(fp) / static_cast<double>(neg);
        const double y0 = static_cast<double>(tp) / static_cast<double>(pos);
        tp += tie_pos;
        fp += tie_neg;
        const double x1 = static_cast<double>(fp) / static_cast<double>(neg);
        const double y1 = static_cast<double>(tp) / static_cast<double>(pos);
        area2 += (x1 - x0) * (y0 + y1);
        res.thresholds.push_back(s);
        res.points.emplace_back(x1, y1);
    }
    res.auc = 0.5 * area2;
    return res;
}

std::pair<double, double> aggregate(const std::vector<double>& per_fold_values) {
    require(per_fold_values.size() >= 2, "aggregate: need at least 2 values");
    const auto n = static_cast<double>(per_fold_values.size());
    double mean = 0.0;
    for (double v : per_fold_values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : per_fold_values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace onh::eval
