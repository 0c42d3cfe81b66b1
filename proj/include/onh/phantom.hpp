#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "onh/geometry.hpp"

namespace onh::phantom {

using Index = Eigen::Index;

/// Raster geometry. Axis order is [B-scans, A-scans, depth pixels]; raw
/// depth increases posteriorly and is negated when converting to world
/// coordinates, so +z points anteriorly everywhere outside the raster.
struct GridSpec {
    std::array<Index, 3> dims{97, 384, 496};
    Eigen::Vector3d spacing_mm{0.035, 0.0115, 0.00387};

    /// Spectralis raster of the source scans.
    static GridSpec full_resolution() { return {}; }

    /// CI-scale raster covering the same physical extent.
    static GridSpec desk_scale();

    Index voxels() const { return dims[0] * dims[1] * dims[2]; }
    double extent(int axis) const { return static_cast<double>(dims[static_cast<std::size_t>(axis)]) * spacing_mm[axis]; }
};

struct SegmentedVolume {
    std::array<Index, 3> dims{0, 0, 0};
    Eigen::Vector3d spacing_mm{0, 0, 0};
    std::vector<std::uint8_t> labels;  // row-major [b][a][depth]
    geom::Points bmo;                  // world mm, on the RPE/BM opening rim

    Index voxels() const { return dims[0] * dims[1] * dims[2]; }
    Index flat(Index ib, Index ia, Index id) const { return (ib * dims[1] + ia) * dims[2] + id; }
    std::uint8_t at(Index ib, Index ia, Index id) const { return labels[static_cast<std::size_t>(flat(ib, ia, id))]; }

    /// Voxel center in world mm (+z anterior).
    Eigen::Vector3d voxel_center_world(Index ib, Index ia, Index id) const;
};

/// Per-voxel displacement in mm. Channels follow the volume axes
/// (u0 across B-scans, u1 across A-scans, u2 along raw depth).
struct DisplacementField {
    std::array<Index, 3> dims{0, 0, 0};
    Eigen::Vector3d spacing_mm{0, 0, 0};
    std::vector<double> u;  // 3 channels, voxel-interleaved
    std::vector<std::uint8_t> lc_mask;

    Index voxels() const { return dims[0] * dims[1] * dims[2]; }
    Index flat(Index ib, Index ia, Index id) const { return (ib * dims[1] + ia) * dims[2] + id; }
    Eigen::Vector3d at(Index ib, Index ia, Index id) const {
        const auto o = static_cast<std::size_t>(3 * flat(ib, ia, id));
        return {u[o], u[o + 1], u[o + 2]};
    }
    void set(Index ib, Index ia, Index id, const Eigen::Vector3d& v) {
        const auto o = static_cast<std::size_t>(3 * flat(ib, ia, id));
        u[o] = v[0];
        u[o + 1] = v[1];
        u[o + 2] = v[2];
    }
};

/// Anatomy and load parameters for one synthetic ONH.
struct PhantomParams {
    GridSpec grid;

    double bmo_radius_mm = 0.8;
    double cup_depth_mm = 0.2;
    double lc_depth_mm = 0.38;          // anterior LC below the BMO plane, at the axis
    double lc_curvature_radius_mm = 3.0;
    double lc_thickness_mm = 0.26;
    double canal_wall_angle_deg = 15.0;

    double rnfl_mm = 0.11;
    double gcl_ipl_mm = 0.09;
    double orl_mm = 0.20;
    double rpe_mm = 0.045;
    double choroid_mm = 0.17;
    double sclera_mm = 0.37;

    // modulation of rnfl / gcl thickness around the canal (relative amp, phase)
    double rnfl_mod_amp = 0.10;
    double rnfl_mod_phase = 0.0;
    double gcl_mod_amp = 0.10;
    double gcl_mod_phase = 0.0;

    double tilt_x_deg = 0.0;  // depth gradient along the A-scan axis
    double tilt_y_deg = 0.0;  // depth gradient across B-scans
    double canal_offset_x_mm = 0.0;
    double canal_offset_y_mm = 0.0;

    double ilm_depth_fraction = 0.18;  // resting ILM depth as share of the depth extent
    double surface_warp_mm = 0.006;    // shared low-frequency warp amplitude
    int bmo_point_count = 64;

    double fragility = 0.0;  // f in [0,1]; drives the load amplitude only

    // IOP load model: posterior LC bowing A*exp(-rho^2/(2 w^2)), w tied to
    // the BMO radius. amplitude_max was calibrated once against the strain
    // module so f=1 lands well above the 4% label threshold on default
    // geometry; see configs/demo.json.
    double disp_amplitude_max_mm = 0.055;
    double disp_width_factor = 0.6;
    double disp_translation_max_mm = 0.008;

    void validate() const;  // throws on geometrically impossible combinations
};

struct Phantom {
    PhantomParams params;
    SegmentedVolume volume;
    std::vector<geom::BoundarySurface> surfaces;
};

/// Layered axisymmetric-with-perturbation anatomy on the params' raster.
/// Surfaces are emitted at analytic (sub-voxel) depths, restricted to
/// columns where the rasterized tissue run is nonempty, so every surface
/// point stays within a voxel of its label. Deterministic in (params, seed).
Phantom generate_phantom(const PhantomParams& params, std::uint64_t seed);

/// IOP-elevation load case: Gaussian posterior LC bowing with amplitude
/// amplitude_max * fragility, tapered to zero at the lateral borders, plus
/// a small random rigid translation. The robustness label is recomputed
/// downstream from this field, never read off the fragility score.
DisplacementField generate_displacement(const SegmentedVolume& volume, const PhantomParams& params,
                                        std::uint64_t seed);

struct CohortRanges {
    GridSpec grid = GridSpec::desk_scale();
    std::array<double, 2> bmo_radius{0.60, 1.00};
    std::array<double, 2> cup_depth{0.10, 0.32};
    std::array<double, 2> lc_depth{0.28, 0.50};
    std::array<double, 2> lc_curvature_radius{2.0, 4.0};
    std::array<double, 2> lc_thickness{0.20, 0.32};
    std::array<double, 2> canal_wall_angle{5.0, 25.0};
    std::array<double, 2> rnfl{0.08, 0.14};
    std::array<double, 2> gcl_ipl{0.07, 0.12};
    std::array<double, 2> orl{0.16, 0.24};
    std::array<double, 2> rpe{0.035, 0.055};
    std::array<double, 2> choroid{0.12, 0.22};
    std::array<double, 2> sclera{0.30, 0.44};
    std::array<double, 2> tilt{-2.5, 2.5};
    std::array<double, 2> canal_offset{-0.10, 0.10};
    std::array<double, 2> mod_amp{0.0, 0.16};

    // fragility = clamp01(w_r * radius_hat + w_d * depth_hat + w_n * noise
    //             + balance_target - 0.5); only canal size and LC depth
    //             carry class signal, everything else is drawn independently
    double weight_radius = 0.55;
    double weight_lc_depth = 0.30;
    double weight_noise = 0.15;
};

/// Parameter draw for cohort member `index` (deterministic in seed+index).
PhantomParams draw_params(const CohortRanges& ranges, double balance_target, std::uint64_t seed,
                          std::uint64_t index);

/// Streaming cohort generation; consume(i, phantom, field) is called once
/// per member, possibly from worker threads (one call per index).
void generate_cohort_streaming(Index n, double balance_target, std::uint64_t seed,
                               const CohortRanges& ranges, int jobs,
                               const std::function<void(Index, const Phantom&, const DisplacementField&)>& consume);

struct CohortSample {
    Phantom phantom;
    DisplacementField field;
};

/// Materialized cohort; prefer generate_cohort_streaming for large n.
std::vector<CohortSample> generate_cohort(Index n, double balance_target, std::uint64_t seed,
                                          const CohortRanges& ranges = CohortRanges());

// Raw + JSON-sidecar volume and displacement files.
void save_volume(const std::string& prefix, const SegmentedVolume& volume);
SegmentedVolume load_volume(const std::string& prefix);
void save_displacement(const std::string& prefix, const DisplacementField& field);
DisplacementField load_displacement(const std::string& prefix, const SegmentedVolume& volume);

// Boundary surfaces as CSV (tissue_id, role, x_mm, y_mm, z_mm).
void save_surfaces(const std::string& path, const std::vector<geom::BoundarySurface>& surfaces);
std::vector<geom::BoundarySurface> load_surfaces(const std::string& path);

}  // namespace onh::phantom
