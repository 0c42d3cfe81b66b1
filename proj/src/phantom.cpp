#include "onh/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "json.hpp"

namespace onh::phantom {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

double smoothstep(double t) {
    t = clamp01(t);
    return t * t * (3.0 - 2.0 * t);
}

}  // namespace

GridSpec GridSpec::desk_scale() {
    GridSpec g;
    g.dims = {33, 128, 160};
    // keep the physical field of view of the full raster
    g.spacing_mm = {0.035 * 97.0 / 33.0, 0.0115 * 384.0 / 128.0, 0.00387 * 496.0 / 160.0};
    return g;
}

Eigen::Vector3d SegmentedVolume::voxel_center_world(Index ib, Index ia, Index id) const {
    const double y = (static_cast<double>(ib) + 0.5) * spacing_mm[0];
    const double x = (static_cast<double>(ia) + 0.5) * spacing_mm[1];
    const double depth = (static_cast<double>(id) + 0.5) * spacing_mm[2];
    return {x, y, -depth};
}

void PhantomParams::validate() const {
    auto positive = [](double v, const char* name) {
        require(v > 0.0, std::string("PhantomParams: ") + name + " must be positive");
    };
    positive(bmo_radius_mm, "bmo_radius_mm");
    positive(cup_depth_mm, "cup_depth_mm");
    positive(lc_depth_mm, "lc_depth_mm");
    positive(lc_curvature_radius_mm, "lc_curvature_radius_mm");
    positive(lc_thickness_mm, "lc_thickness_mm");
    positive(rnfl_mm, "rnfl_mm");
    positive(gcl_ipl_mm, "gcl_ipl_mm");
    positive(orl_mm, "orl_mm");
    positive(rpe_mm, "rpe_mm");
    positive(choroid_mm, "choroid_mm");
    positive(sclera_mm, "sclera_mm");
    require(fragility >= 0.0 && fragility <= 1.0, "PhantomParams: fragility must lie in [0,1]");
    require(bmo_point_count >= 3, "PhantomParams: need at least 3 BMO points");
    require(lc_curvature_radius_mm > 1.2 * bmo_radius_mm,
            "PhantomParams: LC curvature radius too small for the canal");

    const double depth_extent = grid.extent(2);
    const double z0 = ilm_depth_fraction * depth_extent;
    const double stack = rnfl_mm + gcl_ipl_mm + orl_mm;
    const double tilt_budget = (std::abs(std::tan(tilt_x_deg * kPi / 180.0)) * grid.extent(1) +
                                std::abs(std::tan(tilt_y_deg * kPi / 180.0)) * grid.extent(0)) /
                               2.0;
    const double deepest =
        z0 + stack + std::max(rpe_mm + choroid_mm + sclera_mm, lc_depth_mm + lc_thickness_mm) +
        tilt_budget + surface_warp_mm;
    require(deepest < 0.97 * depth_extent,
            "PhantomParams: geometry exceeds the volume depth (LC or sclera below the raster)");
    require(cup_depth_mm + 0.02 < stack + lc_depth_mm,
            "PhantomParams: cup depth leaves no prelaminar tissue above the LC");
    const double lateral = std::min(grid.extent(0), grid.extent(1));
    require(2.2 * bmo_radius_mm < lateral,
            "PhantomParams: BMO radius too large for the lateral field of view");
}

namespace {

// per-phantom irregularity: two low-frequency sinusoidal warps shared by
// every surface, so thickness ground truth stays exact
struct Warp {
    double amp = 0.0;
    double fx1 = 0, fy1 = 0, ph1 = 0;
    double fx2 = 0, fy2 = 0, ph2 = 0;

    static Warp draw(double amplitude, Rng& rng) {
        Warp w;
        w.amp = amplitude;
        w.fx1 = rng.uniform(0.15, 0.45);
        w.fy1 = rng.uniform(0.15, 0.45);
        w.ph1 = rng.uniform(0.0, 2.0 * kPi);
        w.fx2 = rng.uniform(0.15, 0.45);
        w.fy2 = rng.uniform(0.15, 0.45);
        w.ph2 = rng.uniform(0.0, 2.0 * kPi);
        return w;
    }

    double operator()(double x, double y) const {
        return 0.5 * amp *
               (std::sin(2.0 * kPi * (fx1 * x + fy1 * y) + ph1) +
                std::sin(2.0 * kPi * (fx2 * x + fy2 * y) + ph2));
    }
};

struct ColumnGeometry {
    const PhantomParams& p;
    Warp warp;
    double cx, cy;          // canal center, world lateral mm
    double z0;              // resting ILM depth
    double tan_tx, tan_ty;  // tilt slopes
    double stack_mean;      // mean retina thickness (BMO plane offset)
    double sigma_cup;
    double tan_wall;
    double d_ref;  // wall cone apex depth
    double r_lc;   // lateral extent of the LC disk

    explicit ColumnGeometry(const PhantomParams& params, const Warp& w) : p(params), warp(w) {
        cx = 0.5 * p.grid.extent(1) + p.canal_offset_x_mm;
        cy = 0.5 * p.grid.extent(0) + p.canal_offset_y_mm;
        z0 = p.ilm_depth_fraction * p.grid.extent(2);
        tan_tx = std::tan(p.tilt_x_deg * kPi / 180.0);
        tan_ty = std::tan(p.tilt_y_deg * kPi / 180.0);
        stack_mean = p.rnfl_mm + p.gcl_ipl_mm + p.orl_mm;
        sigma_cup = 0.55 * p.bmo_radius_mm;
        tan_wall = std::tan(p.canal_wall_angle_deg * kPi / 180.0);
        d_ref = z0 + stack_mean;
        const double wall_at_lc = p.bmo_radius_mm + std::max(0.0, p.lc_depth_mm) * tan_wall;
        r_lc = wall_at_lc + 0.08;
    }

    struct Runs {
        // (label, top_depth, bottom_depth), disjoint, ordered by depth
        std::array<std::tuple<int, double, double>, 10> seg;
        int count = 0;
        void push(int label, double top, double bot) {
            if (bot > top) seg[static_cast<std::size_t>(count++)] = {label, top, bot};
        }
    };

    Runs column(double x, double y) const {
        const double dx = x - cx, dy = y - cy;
        const double rho = std::hypot(dx, dy);
        const double theta = std::atan2(dy, dx);
        const double base = z0 + tan_tx * dx + tan_ty * dy + warp(x, y);

        const double t_rnfl = p.rnfl_mm * (1.0 + p.rnfl_mod_amp * std::cos(theta - p.rnfl_mod_phase));
        const double t_gcl =
            p.gcl_ipl_mm * (1.0 + p.gcl_mod_amp * std::cos(theta - p.gcl_mod_phase));

        const double d_ilm = base + p.cup_depth_mm * std::exp(-rho * rho / (2.0 * sigma_cup * sigma_cup));
        const double d_rnfl = base + t_rnfl;
        const double d_gcl = d_rnfl + t_gcl;
        const double d_orl = d_gcl + p.orl_mm;
        const double d_rpe_bot = d_orl + p.rpe_mm;
        const double d_chor_bot = d_rpe_bot + p.choroid_mm;
        const double d_scl_bot = d_chor_bot + p.sclera_mm;

        const double d_plane = base + stack_mean;
        const double R = p.lc_curvature_radius_mm;
        const double rr = std::min(rho, R);
        const double sag = R - std::sqrt(R * R - rr * rr);
        const double d_alc = d_plane + p.lc_depth_mm - sag;
        const double d_plc = d_alc + p.lc_thickness_mm;

        Runs runs;
        if (rho >= p.bmo_radius_mm) {
            runs.push(geom::kRnflPlt, d_ilm, d_rnfl);
            runs.push(geom::kGclIpl, d_rnfl, d_gcl);
            runs.push(geom::kOrl, d_gcl, d_orl);
            runs.push(geom::kRpeBm, d_orl, d_rpe_bot);
            // scleral canal widens with depth; the column becomes canal below d_star
            const double d_star = tan_wall > 1e-9
                                      ? d_ref + (rho - p.bmo_radius_mm) / tan_wall
                                      : std::numeric_limits<double>::infinity();
            runs.push(geom::kChoroid, d_rpe_bot, std::min(d_chor_bot, std::max(d_star, d_rpe_bot)));
            runs.push(geom::kSclera, d_chor_bot, std::min(d_scl_bot, std::max(d_star, d_chor_bot)));
            const double wedge_top = std::max(d_star, d_rpe_bot);
            runs.push(geom::kRnflPlt, wedge_top, std::max(d_alc, wedge_top));
            if (rho <= r_lc)
                runs.push(geom::kLaminaCribrosa, std::max(d_alc, wedge_top), std::max(d_plc, wedge_top));
        } else {
            runs.push(geom::kRnflPlt, d_ilm, d_alc);
            runs.push(geom::kLaminaCribrosa, d_alc, d_plc);
        }
        return runs;
    }

    double rpe_anterior_depth(double x, double y) const {
        const double dx = x - cx, dy = y - cy;
        const double theta = std::atan2(dy, dx);
        const double base = z0 + tan_tx * dx + tan_ty * dy + warp(x, y);
        const double t_rnfl = p.rnfl_mm * (1.0 + p.rnfl_mod_amp * std::cos(theta - p.rnfl_mod_phase));
        const double t_gcl =
            p.gcl_ipl_mm * (1.0 + p.gcl_mod_amp * std::cos(theta - p.gcl_mod_phase));
        return base + t_rnfl + t_gcl + p.orl_mm;
    }
};

}  // namespace

Phantom generate_phantom(const PhantomParams& params, std::uint64_t seed) {
    params.validate();
    Rng rng(seed);
    const Warp warp = Warp::draw(params.surface_warp_mm, rng);
    const ColumnGeometry geo(params, warp);

    Phantom out;
    out.params = params;
    SegmentedVolume& vol = out.volume;
    vol.dims = params.grid.dims;
    vol.spacing_mm = params.grid.spacing_mm;
    vol.labels.assign(static_cast<std::size_t>(vol.voxels()), 0);

    const Index nb = vol.dims[0], na = vol.dims[1], nd = vol.dims[2];
    const double s0 = vol.spacing_mm[0], s1 = vol.spacing_mm[1], s2 = vol.spacing_mm[2];

    // anterior surfaces of tissues 1..7, plus posterior sclera and LC
    std::map<std::pair<int, int>, std::vector<Eigen::RowVector3d>> surface_points;
    auto add_point = [&](int tissue, geom::SurfaceRole role, double x, double y, double depth) {
        surface_points[{tissue, role == geom::SurfaceRole::Posterior ? 1 : 0}].push_back(
            Eigen::RowVector3d(x, y, -depth));
    };

    for (Index ib = 0; ib < nb; ++ib) {
        const double y = (static_cast<double>(ib) + 0.5) * s0;
        for (Index ia = 0; ia < na; ++ia) {
            const double x = (static_cast<double>(ia) + 0.5) * s1;
            const auto runs = geo.column(x, y);
            bool ilm_done = false;
            for (int r = 0; r < runs.count; ++r) {
                auto [label, top, bot] = runs.seg[static_cast<std::size_t>(r)];
                top = std::max(top, 0.0);
                bot = std::min(bot, static_cast<double>(nd) * s2);
                if (bot <= top) continue;
                const auto k_lo = static_cast<Index>(std::ceil(top / s2 - 0.5));
                const auto k_hi = static_cast<Index>(std::ceil(bot / s2 - 0.5)) - 1;
                const Index lo = std::max<Index>(k_lo, 0);
                const Index hi = std::min<Index>(k_hi, nd - 1);
                if (lo > hi) continue;  // run too thin to own a voxel; no surface point either
                for (Index k = lo; k <= hi; ++k)
                    vol.labels[static_cast<std::size_t>(vol.flat(ib, ia, k))] =
                        static_cast<std::uint8_t>(label);
                if (label == geom::kRnflPlt) {
                    if (!ilm_done) {
                        add_point(label, geom::SurfaceRole::Anterior, x, y, top);
                        ilm_done = true;
                    }
                } else {
                    add_point(label, geom::SurfaceRole::Anterior, x, y, top);
                }
                if (label == geom::kSclera || label == geom::kLaminaCribrosa)
                    add_point(label, geom::SurfaceRole::Posterior, x, y, bot);
            }
        }
    }

    // BMO points on the RPE/BM opening rim
    vol.bmo.resize(params.bmo_point_count, 3);
    for (int k = 0; k < params.bmo_point_count; ++k) {
        const double theta = 2.0 * kPi * static_cast<double>(k) / params.bmo_point_count;
        const double bx = geo.cx + params.bmo_radius_mm * std::cos(theta);
        const double by = geo.cy + params.bmo_radius_mm * std::sin(theta);
        vol.bmo.row(k) = Eigen::RowVector3d(bx, by, -geo.rpe_anterior_depth(bx, by));
    }

    for (auto& [key, pts] : surface_points) {
        geom::BoundarySurface surf;
        surf.tissue = key.first;
        surf.role = key.second ? geom::SurfaceRole::Posterior : geom::SurfaceRole::Anterior;
        surf.points.resize(static_cast<Index>(pts.size()), 3);
        for (std::size_t i = 0; i < pts.size(); ++i) surf.points.row(static_cast<Index>(i)) = pts[i];
        out.surfaces.push_back(std::move(surf));
    }
    return out;
}

DisplacementField generate_displacement(const SegmentedVolume& volume, const PhantomParams& params,
                                        std::uint64_t seed) {
    require(volume.voxels() > 0, "generate_displacement: empty volume");
    Rng rng(seed);
    DisplacementField field;
    field.dims = volume.dims;
    field.spacing_mm = volume.spacing_mm;
    field.u.assign(static_cast<std::size_t>(3 * volume.voxels()), 0.0);
    field.lc_mask.assign(static_cast<std::size_t>(volume.voxels()), 0);

    Eigen::Vector3d translation;
    for (int a = 0; a < 3; ++a)
        translation[a] = rng.uniform(-params.disp_translation_max_mm, params.disp_translation_max_mm);

    const double cx = 0.5 * params.grid.extent(1) + params.canal_offset_x_mm;
    const double cy = 0.5 * params.grid.extent(0) + params.canal_offset_y_mm;
    const double w = params.disp_width_factor * params.bmo_radius_mm;
    const double amplitude = params.disp_amplitude_max_mm * params.fragility;

    const Index nb = volume.dims[0], na = volume.dims[1], nd = volume.dims[2];
    const double s0 = volume.spacing_mm[0], s1 = volume.spacing_mm[1];
    const double ext_x = params.grid.extent(1), ext_y = params.grid.extent(0);
    // the bowing dies out exactly at the lateral borders; only the rigid
    // translation survives there
    const double m0 = 2.0 * std::max(s0, s1);
    const double m1 = m0 + 0.35;
    auto taper1 = [&](double dist) { return smoothstep((dist - m0) / (m1 - m0)); };

    for (Index ib = 0; ib < nb; ++ib) {
        const double y = (static_cast<double>(ib) + 0.5) * s0;
        for (Index ia = 0; ia < na; ++ia) {
            const double x = (static_cast<double>(ia) + 0.5) * s1;
            const double rho2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            const double taper = taper1(x) * taper1(ext_x - x) * taper1(y) * taper1(ext_y - y);
            const double bow = amplitude * std::exp(-rho2 / (2.0 * w * w)) * taper;
            const Eigen::Vector3d u(translation[0], translation[1], translation[2] + bow);
            for (Index id = 0; id < nd; ++id) {
                field.set(ib, ia, id, u);
                if (volume.at(ib, ia, id) == geom::kLaminaCribrosa)
                    field.lc_mask[static_cast<std::size_t>(field.flat(ib, ia, id))] = 1;
            }
        }
    }
    return field;
}

PhantomParams draw_params(const CohortRanges& ranges, double balance_target, std::uint64_t seed,
                          std::uint64_t index) {
    Rng rng = Rng(seed).fork(3 * index);
    auto draw = [&](const std::array<double, 2>& r) { return rng.uniform(r[0], r[1]); };

    PhantomParams p;
    p.grid = ranges.grid;
    const double radius_hat = rng.unit();
    const double depth_hat = rng.unit();
    const double noise = rng.unit();
    p.bmo_radius_mm = ranges.bmo_radius[0] + radius_hat * (ranges.bmo_radius[1] - ranges.bmo_radius[0]);
    p.lc_depth_mm = ranges.lc_depth[0] + depth_hat * (ranges.lc_depth[1] - ranges.lc_depth[0]);
    p.fragility = clamp01(ranges.weight_radius * radius_hat + ranges.weight_lc_depth * depth_hat +
                          ranges.weight_noise * noise + balance_target - 0.5);

    p.cup_depth_mm = draw(ranges.cup_depth);
    p.lc_curvature_radius_mm = draw(ranges.lc_curvature_radius);
    p.lc_thickness_mm = draw(ranges.lc_thickness);
    p.canal_wall_angle_deg = draw(ranges.canal_wall_angle);
    p.rnfl_mm = draw(ranges.rnfl);
    p.gcl_ipl_mm = draw(ranges.gcl_ipl);
    p.orl_mm = draw(ranges.orl);
    p.rpe_mm = draw(ranges.rpe);
    p.choroid_mm = draw(ranges.choroid);
    p.sclera_mm = draw(ranges.sclera);
    p.tilt_x_deg = draw(ranges.tilt);
    p.tilt_y_deg = draw(ranges.tilt);
    p.canal_offset_x_mm = draw(ranges.canal_offset);
    p.canal_offset_y_mm = draw(ranges.canal_offset);
    p.rnfl_mod_amp = draw(ranges.mod_amp);
    p.rnfl_mod_phase = rng.uniform(0.0, 2.0 * kPi);
    p.gcl_mod_amp = draw(ranges.mod_amp);
    p.gcl_mod_phase = rng.uniform(0.0, 2.0 * kPi);
    return p;
}

void generate_cohort_streaming(Index n, double balance_target, std::uint64_t seed,
                               const CohortRanges& ranges, int jobs,
                               const std::function<void(Index, const Phantom&, const DisplacementField&)>& consume) {
    require(n >= 2, "generate_cohort: need at least 2 members");
    require(balance_target > 0.0 && balance_target < 1.0,
            "generate_cohort: balance target must lie in (0,1)");
    Rng base(seed);
    parallel_for(static_cast<std::size_t>(n), jobs, [&](std::size_t i) {
        const auto idx = static_cast<std::uint64_t>(i);
        const PhantomParams params = draw_params(ranges, balance_target, seed, idx);
        Phantom ph = generate_phantom(params, base.fork(3 * idx + 1).next());
        DisplacementField field = generate_displacement(ph.volume, params, base.fork(3 * idx + 2).next());
        consume(static_cast<Index>(i), ph, field);
    });
}

std::vector<CohortSample> generate_cohort(Index n, double balance_target, std::uint64_t seed,
                                          const CohortRanges& ranges) {
    std::vector<CohortSample> out(static_cast<std::size_t>(n));
    generate_cohort_streaming(n, balance_target, seed, ranges, 1,
                              [&](Index i, const Phantom& ph, const DisplacementField& f) {
                                  out[static_cast<std::size_t>(i)].phantom = ph;
                                  out[static_cast<std::size_t>(i)].field = f;
                              });
    return out;
}

namespace {

nlohmann::ordered_json grid_sidecar(const std::array<Index, 3>& dims, const Eigen::Vector3d& spacing) {
    nlohmann::ordered_json j;
    j["dims"] = {dims[0], dims[1], dims[2]};
    j["spacing_mm"] = {spacing[0], spacing[1], spacing[2]};
    return j;
}

}  // namespace

void save_volume(const std::string& prefix, const SegmentedVolume& volume) {
    std::string raw(reinterpret_cast<const char*>(volume.labels.data()), volume.labels.size());
    write_file(prefix + ".raw", raw);
    nlohmann::ordered_json j = grid_sidecar(volume.dims, volume.spacing_mm);
    auto names = nlohmann::ordered_json::array();
    for (int t = 0; t <= 7; ++t) names.push_back(geom::tissue_name(t));
    j["label_names"] = names;
    auto bmo = nlohmann::ordered_json::array();
    for (Index i = 0; i < volume.bmo.rows(); ++i)
        bmo.push_back({volume.bmo(i, 0), volume.bmo(i, 1), volume.bmo(i, 2)});
    j["bmo_points"] = bmo;
    write_file(prefix + ".json", j.dump(2) + "\n");
}

SegmentedVolume load_volume(const std::string& prefix) {
    const auto j = nlohmann::json::parse(read_file(prefix + ".json"));
    SegmentedVolume vol;
    for (int a = 0; a < 3; ++a) {
        vol.dims[static_cast<std::size_t>(a)] = j.at("dims").at(a).get<Index>();
        vol.spacing_mm[a] = j.at("spacing_mm").at(a).get<double>();
    }
    const std::string raw = read_file(prefix + ".raw");
    require(static_cast<Index>(raw.size()) == vol.voxels(),
            "load_volume: raw size does not match dims in " + prefix + ".json");
    vol.labels.assign(raw.begin(), raw.end());
    const auto& bmo = j.at("bmo_points");
    vol.bmo.resize(static_cast<Index>(bmo.size()), 3);
    for (std::size_t i = 0; i < bmo.size(); ++i)
        for (int a = 0; a < 3; ++a)
            vol.bmo(static_cast<Index>(i), a) = bmo.at(i).at(static_cast<std::size_t>(a)).get<double>();
    return vol;
}

void save_displacement(const std::string& prefix, const DisplacementField& field) {
    std::string raw;
    raw.reserve(field.u.size() * 4);
    for (double v : field.u) append_le_f32(raw, static_cast<float>(v));
    write_file(prefix + ".raw", raw);
    nlohmann::ordered_json j = grid_sidecar(field.dims, field.spacing_mm);
    j["channels"] = 3;
    j["layout"] = "voxel_interleaved";
    write_file(prefix + ".json", j.dump(2) + "\n");
}

DisplacementField load_displacement(const std::string& prefix, const SegmentedVolume& volume) {
    const auto j = nlohmann::json::parse(read_file(prefix + ".json"));
    DisplacementField field;
    for (int a = 0; a < 3; ++a) {
        field.dims[static_cast<std::size_t>(a)] = j.at("dims").at(a).get<Index>();
        field.spacing_mm[a] = j.at("spacing_mm").at(a).get<double>();
    }
    require(field.dims == volume.dims, "load_displacement: dims do not match the volume");
    const std::string raw = read_file(prefix + ".raw");
    require(static_cast<Index>(raw.size()) == 12 * field.voxels(),
            "load_displacement: raw size does not match dims in " + prefix + ".json");
    field.u.resize(static_cast<std::size_t>(3 * field.voxels()));
    const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
    for (std::size_t i = 0; i < field.u.size(); ++i)
        field.u[i] = static_cast<double>(read_le_f32(p + 4 * i));
    field.lc_mask.assign(static_cast<std::size_t>(field.voxels()), 0);
    for (Index v = 0; v < volume.voxels(); ++v)
        if (volume.labels[static_cast<std::size_t>(v)] == geom::kLaminaCribrosa)
            field.lc_mask[static_cast<std::size_t>(v)] = 1;
    return field;
}

void save_surfaces(const std::string& path, const std::vector<geom::BoundarySurface>& surfaces) {
    std::string s = "tissue_id,role,x_mm,y_mm,z_mm\n";
    char buf[160];
    for (const auto& surf : surfaces) {
        const char* role = surf.role == geom::SurfaceRole::Posterior ? "posterior" : "anterior";
        for (Index i = 0; i < surf.points.rows(); ++i) {
            std::snprintf(buf, sizeof(buf), "%d,%s,%.17g,%.17g,%.17g\n", surf.tissue, role,
                          surf.points(i, 0), surf.points(i, 1), surf.points(i, 2));
            s += buf;
        }
    }
    write_file(path, s);
}

std::vector<geom::BoundarySurface> load_surfaces(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "load_surfaces: empty file " + path);
    require(line == "tissue_id,role,x_mm,y_mm,z_mm", "load_surfaces: unexpected header in " + path);
    std::vector<std::pair<int, int>> order;
    std::map<std::pair<int, int>, std::vector<Eigen::RowVector3d>> groups;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int tissue;
        char role[16];
        double x, y, z;
        require(std::sscanf(line.c_str(), "%d,%15[^,],%lf,%lf,%lf", &tissue, role, &x, &y, &z) == 5,
                "load_surfaces: malformed row in " + path + ": " + line);
        const int r = std::string(role) == "posterior" ? 1 : 0;
        const std::pair<int, int> key{tissue, r};
        if (groups.find(key) == groups.end()) order.push_back(key);
        groups[key].push_back(Eigen::RowVector3d(x, y, z));
    }
    std::vector<geom::BoundarySurface> out;
    for (const auto& key : order) {
        geom::BoundarySurface surf;
        surf.tissue = key.first;
        surf.role = key.second ? geom::SurfaceRole::Posterior : geom::SurfaceRole::Anterior;
        const auto& pts = groups[key];
        surf.points.resize(static_cast<Index>(pts.size()), 3);
        for (std::size_t i = 0; i < pts.size(); ++i) surf.points.row(static_cast<Index>(i)) = pts[i];
        out.push_back(std::move(surf));
    }
    return out;
}

}  // namespace onh::phantom
