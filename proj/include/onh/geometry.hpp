#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "onh/core.hpp"

namespace onh::geom {

using Index = Eigen::Index;
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Tissue labels shared by volumes, surfaces and point clouds.
enum Tissue : int {
    kBackground = 0,
    kRnflPlt = 1,
    kGclIpl = 2,
    kOrl = 3,
    kRpeBm = 4,
    kChoroid = 5,
    kSclera = 6,
    kLaminaCribrosa = 7,
};

const char* tissue_name(int tissue);

enum class SurfaceRole { Anterior, Posterior };

struct BoundarySurface {
    int tissue = 0;
    SurfaceRole role = SurfaceRole::Anterior;
    Points points;  // world mm, +z anterior
};

/// ONH point cloud: positions (mm), per-point local tissue thickness (mm,
/// 0 where not applicable) and tissue tag. BMO landmark points ride along
/// so the canonical frame can be re-derived. `canonical` marks clouds
/// expressed in the BMO-aligned frame.
struct OnhPointCloud {
    Points positions;
    Eigen::VectorXd thickness;
    std::vector<int> tissue;
    Points bmo;
    bool canonical = false;

    Index size() const { return positions.rows(); }
};

struct BmoPlane {
    Eigen::Vector3d normal;    // unit, oriented toward +z (anterior)
    double offset = 0.0;       // normal . x = offset
    Eigen::Vector3d centroid;  // mean of the BMO points
};

/// Total least squares plane through the BMO points. The normal is the
/// direction of least variance, oriented so its z component is positive
/// (+z is the anterior direction in world coordinates; raw scan depth is
/// negated on ingest). Throws on collinear or degenerate input.
BmoPlane fit_bmo_plane(const Points& bmo_points);

/// Rigid transform into the canonical frame: BMO centroid at the origin,
/// plane normal along +z, and the projection of the world x axis onto the
/// plane mapped to +x.
OnhPointCloud canonicalize(const OnhPointCloud& cloud, const BmoPlane& plane);

/// The same rigid transform applied to bare points.
Points to_canonical_frame(const Points& points, const BmoPlane& plane);

/// Exact squared Euclidean distance with a fixed summation order, shared
/// by knn and the brute-force oracles.
double squared_distance(const double* a, const double* b, Index dims);

/// Exact k nearest neighbors of points.row(query), self excluded, sorted
/// by (distance, index) with ties going to the lower index.
std::vector<Index> knn(const FeatureMatrix& points, Index query, Index k);

/// knn for every point, as an N x k index matrix. Same metric and tie
/// rule as knn; vectorized row-difference distances.
Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
knn_graph(const FeatureMatrix& points, Index k);

/// thickness[i] = min distance from anterior point i to any posterior
/// point (exhaustive). Both surfaces must carry the same tissue tag.
Eigen::VectorXd local_thickness(const BoundarySurface& anterior, const BoundarySurface& posterior);

/// n points drawn uniformly without replacement from the union of all
/// boundary points (capped at availability). Anterior points whose tissue
/// has a posterior surface in the list carry the local thickness; all
/// others carry 0. `bmo` rides along untouched.
OnhPointCloud sample_point_cloud(const std::vector<BoundarySurface>& boundaries, Index n,
                                 std::uint64_t seed, const Points& bmo = Points(0, 3));

struct AugmentationConfig {
    bool enable_crop = false;
    double crop_fraction = 1.0;  // per-axis share of the bounding box
    bool enable_subsample = false;
    Index subsample_count = 1;
    bool enable_rotation = false;
    double rotation_deg = 0.0;  // about the +z axis
    bool enable_translation = false;
    double translation_mm = 0.0;
    bool enable_noise = false;
    double noise_sigma_mm = 0.0;
    std::uint64_t seed = 0;
};

/// Applies the enabled transforms in fixed order: crop, subsample,
/// rotation, translation, noise. Rotation/translation also move the BMO
/// landmarks; noise perturbs positions only. A crop that would empty the
/// cloud is skipped. The canonical tag is preserved: augmented clouds
/// stay expressed in the canonical frame, just jittered.
OnhPointCloud augment(const OnhPointCloud& cloud, const AugmentationConfig& cfg);

// Point-cloud files: CSV with the fixed header, optional ASCII PLY with
// thickness as a scalar property.
void write_pointcloud_csv(const std::string& path, const OnhPointCloud& cloud);
OnhPointCloud read_pointcloud_csv(const std::string& path);
void write_pointcloud_ply(const std::string& path, const OnhPointCloud& cloud);

}  // namespace onh::geom
