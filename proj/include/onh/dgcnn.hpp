#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "onh/autodiff.hpp"
#include "onh/geometry.hpp"

namespace onh::dgcnn {

using Index = Eigen::Index;

struct DgcnnConfig {
    Index k = 20;                                // neighbors, every EdgeConv layer
    std::vector<Index> edge_channels{64, 64, 128};
    Index aggregation_width = 256;               // global max pool width
    std::vector<Index> head_widths{128, 64, 2};  // last entry = class count
    double leaky_slope = 0.2;
    Index input_channels = 4;  // x, y, z, thickness
    // first-layer neighborhoods use spatial coordinates only by default;
    // later layers always use the full feature space (dynamic graphs)
    bool thickness_in_first_metric = false;

    Index batch_size = 16;
    Index epochs = 100;
    Index patience = 20;
    double learning_rate = 1e-3;
    std::uint64_t seed = 1;

    bool augment_enabled = false;
    geom::AugmentationConfig augment;  // per-sample, per-epoch; seed field ignored
    Index val_subsample = 0;           // 0 = validate on full clouds

    void validate() const;
};

struct TrainingManifest {
    std::uint64_t seed = 0;
    std::string data_hash;
    Index best_epoch = -1;
    Index epochs_run = 0;
};

struct DgcnnModel {
    DgcnnConfig config;
    ad::ParamStore params;
    TrainingManifest manifest;
};

/// Seeded He-uniform initialization of all layer weights.
DgcnnModel init_model(const DgcnnConfig& cfg);

/// Points whose aggregated features win the global max pool: one argmax
/// per pooled channel, deduplicated into `indices`.
struct CriticalPointSet {
    std::vector<Index> indices;         // unique, ascending, into the input cloud
    std::vector<Index> channel_argmax;  // aggregation_width entries
};

struct ForwardResult {
    Eigen::Vector2d logits;
    CriticalPointSet critical;
};

/// Full forward pass. The cloud must be canonical (prevents silently
/// mixing frames) and have more than k points.
ForwardResult forward(const geom::OnhPointCloud& cloud, const DgcnnModel& model);

/// Probability of the Fragile class.
double predict_proba(const geom::OnhPointCloud& cloud, const DgcnnModel& model);

/// Cross-entropy loss for one sample; `grads` keyed by parameter name.
struct LossEval {
    double loss;
    std::map<std::string, ad::DenseArray> grads;
};
LossEval loss_and_gradients(const geom::OnhPointCloud& cloud, int label, const DgcnnModel& model);
double loss_only(const geom::OnhPointCloud& cloud, int label, const DgcnnModel& model);

struct LabeledCloud {
    std::string id;
    geom::OnhPointCloud cloud;
    int label = 0;  // 0 robust, 1 fragile
};

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    DgcnnModel model;  // snapshot at the best validation loss
    std::vector<EpochStats> history;
};

/// Adam + softmax cross-entropy with per-sample gradient accumulation in
/// fixed sample order (batch members may be evaluated on `jobs` threads).
/// Early stopping on validation loss. Throws on divergence, naming the
/// epoch.
TrainResult train(const std::vector<LabeledCloud>& train_set,
                  const std::vector<LabeledCloud>& val_set, const DgcnnConfig& cfg, int jobs = 1);

/// Critical points of several clouds pooled into one canonical-frame set.
struct PooledCriticalPoints {
    geom::Points positions;
    std::vector<int> source;  // cloud index per pooled point
};

PooledCriticalPoints pool_critical_points(const std::vector<const geom::OnhPointCloud*>& clouds,
                                          const std::vector<CriticalPointSet>& sets);

/// Number of OTHER pooled points within `radius_mm` of each pooled point.
Eigen::VectorXi critical_density_counts(const geom::Points& pooled, double radius_mm = 0.075);

void write_critical_csv(const std::string& path, const geom::Points& pooled,
                        const Eigen::VectorXi& counts);
void write_critical_ply(const std::string& path, const geom::Points& pooled,
                        const Eigen::VectorXi& counts);

void save_model(const std::string& prefix, const DgcnnModel& model, const std::string& config_hash);
DgcnnModel load_model(const std::string& prefix);

}  // namespace onh::dgcnn
