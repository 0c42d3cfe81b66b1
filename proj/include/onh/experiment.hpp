#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "onh/baselines.hpp"
#include "onh/dgcnn.hpp"
#include "onh/eval.hpp"
#include "onh/geometry.hpp"
#include "onh/phantom.hpp"
#include "onh/strain.hpp"

namespace onh::experiment {

using Index = Eigen::Index;

/// Thrown for malformed configs and bad user input (CLI exit code 1, as
/// opposed to runtime failures which exit 2).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    int jobs = 1;

    Index cohort_n = 200;
    double balance_target = 0.5;
    phantom::CohortRanges ranges;  // grid included

    Index n_points = 1024;

    double strain_threshold = 0.04;
    strain::EffectiveStrainFormula strain_formula = strain::EffectiveStrainFormula::VonMises;

    int folds = 5;
    std::array<double, 3> fractions{0.70, 0.15, 0.15};

    bool dgcnn_enabled = true;
    dgcnn::DgcnnConfig dgcnn;
    bool dgcnn_augment_crop = true;
    bool dgcnn_augment_rotation = true;
    bool dgcnn_augment_translation = true;
    bool dgcnn_augment_subsample = true;
    bool dgcnn_augment_noise = true;

    bool rf_enabled = true;
    baselines::RandomForestOptions rf;

    bool ae_enabled = true;
    baselines::AutoencoderConfig ae;

    double critical_radius_mm = 0.075;

    std::string config_hash;  // of the canonical serialized form
};

/// Parses and validates a config document; error messages name the
/// offending field. The accepted structure is published per
/// config_schema_json().
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_schema_json();

/// Compact per-sample records the evaluation runs on.
struct CohortData {
    eval::Dataset dataset;
    std::vector<double> e_eff;
    std::vector<dgcnn::LabeledCloud> clouds;  // canonical, full size
    std::vector<baselines::StructuralParameterVector> features;
    std::vector<baselines::LabeledSection> sections;
    std::vector<double> r_bmo_mm;  // mean in-plane BMO radius per sample
};

/// Streams the cohort through the full labeling pipeline: phantom ->
/// displacement -> strain label; point cloud, structural parameters and
/// the central section are extracted on the way. Volumes and fields are
/// discarded after use.
CohortData build_cohort(const ExperimentConfig& cfg);

struct MethodFoldResult {
    std::string method;
    int fold = 0;
    double auc = 0.0;
    eval::RocResult roc;
};

struct CriticalAnalysis {
    int fold = -1;  // best DGCNN fold
    geom::Points pooled;
    Eigen::VectorXi counts;
    std::vector<double> radius_ratio;  // lateral radius / source r_bmo per pooled point
    double mass_fraction_annulus = 0.0;  // counts mass with ratio in [0.7, 1.5]
    Index max_set_size = 0;
};

struct EvalRun {
    std::vector<MethodFoldResult> per_fold;
    CriticalAnalysis critical;
};

/// Full cross-validated comparison; writes metrics.jsonl, summary.json,
/// critical_points.csv (+ .ply) and manifest.json under out_dir.
EvalRun run_eval(const ExperimentConfig& cfg, const CohortData& cohort, const std::string& out_dir);

// ---- file-based pipeline stages used by the CLI ----

void write_manifest(const std::string& dir, const std::string& command,
                    const std::string& config_hash, std::uint64_t seed);

/// phantom generate: volume_NNN.{raw,json}, disp_NNN.{raw,json},
/// surfaces_NNN.csv per member plus a manifest.
void stage_phantom_generate(const ExperimentConfig& cfg, Index n, std::uint64_t seed,
                            const std::string& out_dir);

/// extract pointcloud: canonical cloud_NNN.csv (+ meta sidecar, optional PLY).
void stage_extract_pointcloud(const std::string& in_dir, const std::string& out_dir, Index n_points,
                              std::uint64_t seed, bool ply);

/// extract params: features.csv over all members of in_dir.
void stage_extract_params(const std::string& in_dir, const std::string& out_csv);

/// label strain: labels.jsonl records {id, e_eff, threshold, label}.
void stage_label_strain(const std::string& in_dir, const std::string& out_path, double threshold,
                        strain::EffectiveStrainFormula formula);

/// critical-points: forward every cloud in data_dir through the model,
/// pool, count neighbors, write CSV (+ optional PLY).
void stage_critical_points(const std::string& model_prefix, const std::string& data_dir,
                           const std::string& out_csv, double radius_mm, bool ply);

/// report: plain-text table + Fig-4-style ROC point CSV from a run dir.
std::string stage_report(const std::string& run_dir, const std::string& roc_csv_out);

/// Sample ids present in a phantom output directory (sorted).
std::vector<std::string> list_members(const std::string& dir, const std::string& prefix,
                                      const std::string& suffix);

}  // namespace onh::experiment
