#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "onh/autodiff.hpp"
#include "onh/geometry.hpp"
#include "onh/phantom.hpp"

namespace onh::baselines {

using Index = Eigen::Index;

/// The 8 structural parameter families flattened to 29 scalars. Octants
/// are 45-degree sectors about the canal axis, sector 0 starting at +x,
/// counterclockwise.
struct StructuralParameterVector {
    static constexpr int kCount = 29;

    std::array<double, 8> rim_width_mm{};      // minimum rim width per octant
    std::array<double, 8> rnfl_mm{};           // RNFL thickness at 1.5 r_bmo
    std::array<double, 8> gcl_ipl_mm{};        // GCL+IPL thickness at 1.5 r_bmo
    double prelamina_depth_mm = 0.0;
    double min_prelamina_thickness_mm = 0.0;
    double lc_depth_mm = 0.0;
    double lc_shape_index = 0.0;  // Koenderink S in [-1, 1]
    double bmo_area_mm2 = 0.0;

    Eigen::Matrix<double, kCount, 1> flatten() const;
    static const std::array<const char*, kCount>& names();
};

/// Extracts all 29 parameters from canonical-frame boundary surfaces and
/// BMO points. Throws, naming the tissue, when a required surface is
/// missing.
StructuralParameterVector extract_structural_parameters(
    const std::vector<geom::BoundarySurface>& canonical_surfaces, const geom::Points& canonical_bmo);

void write_features_csv(const std::string& path, const std::vector<std::string>& ids,
                        const std::vector<StructuralParameterVector>& rows);

// ---- random forest ----

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::array<int, 2> class_counts{0, 0};
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // node 0 is the root
};

struct RandomForestOptions {
    int n_trees = 100;
    bool bootstrap = true;
    int features_per_node = 0;  // 0 = floor(sqrt(feature count))
    std::uint64_t seed = 0;
};

struct RandomForest {
    std::vector<DecisionTree> trees;
    int n_features = 0;
    std::uint64_t seed = 0;
};

/// Gini-impurity CART forest; trees grow until pure (or no valid split
/// among the sampled features). Deterministic given the seed; both
/// classes must be present.
RandomForest train_random_forest(const geom::FeatureMatrix& features, const std::vector<int>& labels,
                                 const RandomForestOptions& opts = RandomForestOptions());

/// Fraction of trees whose leaf majority is Fragile (ties vote Robust).
double rf_predict(const RandomForest& forest, const Eigen::VectorXd& features);

void save_forest_json(const std::string& path, const RandomForest& forest);
RandomForest load_forest_json(const std::string& path);

// ---- autoencoder + MLP classifier ----

/// Downsampled one-hot tissue map of the central B-scan.
struct Section {
    Index width = 0;   // A-scan bins
    Index height = 0;  // depth bins
    std::vector<std::uint8_t> classes;  // row-major [width][height]
};

/// Nearest-neighbor downsample of the B-scan closest to the BMO center.
Section extract_central_section(const phantom::SegmentedVolume& volume, Index raster_width,
                                Index raster_height);

struct AutoencoderConfig {
    std::array<Index, 2> raster{64, 96};
    Index classes = 8;
    Index latent = 64;
    double leaky_slope = 0.2;
    double learning_rate = 1e-3;
    Index batch_size = 8;
    Index epochs = 200;
    std::uint64_t seed = 1;

    std::vector<Index> mlp_hidden{32};
    double mlp_learning_rate = 1e-3;
    Index mlp_epochs = 200;
    Index mlp_patience = 20;
};

struct AutoencoderModel {
    AutoencoderConfig config;
    ad::ParamStore params;  // enc.w enc.b dec.w dec.b
    bool trained = false;
    std::vector<double> loss_history;
};

/// Unsupervised training: linear encoder to the latent width (LeakyReLU),
/// mirrored linear decoder to per-pixel class logits, mean per-pixel
/// softmax cross-entropy.
AutoencoderModel train_autoencoder(const std::vector<Section>& sections,
                                   const AutoencoderConfig& cfg, int jobs = 1);

/// Argmax-decoded reconstruction of a section.
Section reconstruct(const AutoencoderModel& model, const Section& section);

struct LabeledSection {
    std::string id;
    Section section;
    int label = 0;
};

struct AeClassifier {
    AutoencoderModel autoencoder;  // encoder weights frozen
    ad::ParamStore mlp;
};

/// Supervised MLP head on the frozen encoder. Encoder weights are
/// bit-identical before and after.
AeClassifier train_ae_classifier(const AutoencoderModel& model,
                                 const std::vector<LabeledSection>& train_set,
                                 const std::vector<LabeledSection>& val_set, int jobs = 1);

/// Probability of Fragile; throws if the encoder was never trained.
double ae_classify(const AeClassifier& clf, const Section& section);

/// Macro-averaged Dice over the classes present in either mask; class 0
/// (background) is excluded, classes absent from both masks are skipped.
double dice(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b);

inline double dice(const Section& a, const Section& b) { return dice(a.classes, b.classes); }

}  // namespace onh::baselines
