#include "onh/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace onh::geom {

const char* tissue_name(int tissue) {
    switch (tissue) {
        case kBackground: return "background";
        case kRnflPlt: return "rnfl_plt";
        case kGclIpl: return "gcl_ipl";
        case kOrl: return "orl";
        case kRpeBm: return "rpe_bm";
        case kChoroid: return "choroid";
        case kSclera: return "sclera";
        case kLaminaCribrosa: return "lc";
    }
    return "unknown";
}

BmoPlane fit_bmo_plane(const Points& bmo_points) {
    const Index n = bmo_points.rows();
    require(n >= 3, "fit_bmo_plane: need at least 3 points");
    const Eigen::RowVector3d centroid = bmo_points.colwise().mean();
    const Points centered = bmo_points.rowwise() - centroid;
    const Eigen::Matrix3d cov = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    require(solver.info() == Eigen::Success, "fit_bmo_plane: eigendecomposition failed");
    const Eigen::Vector3d evals = solver.eigenvalues();  // ascending
    require(evals[2] > 0.0 && evals[1] > 1e-10 * evals[2],
            "fit_bmo_plane: points are collinear or degenerate");
    Eigen::Vector3d normal = solver.eigenvectors().col(0);
    if (normal.z() < 0.0) {
        normal = -normal;
    } else if (normal.z() == 0.0) {
        if (normal.x() < 0.0 || (normal.x() == 0.0 && normal.y() < 0.0)) normal = -normal;
    }
    BmoPlane plane;
    plane.normal = normal;
    plane.centroid = centroid.transpose();
    plane.offset = normal.dot(plane.centroid);
    return plane;
}

namespace {

Eigen::Matrix3d canonical_rotation(const BmoPlane& plane) {
    const Eigen::Vector3d n = plane.normal;
    Eigen::Vector3d xref = Eigen::Vector3d::UnitX();
    Eigen::Vector3d xproj = xref - xref.dot(n) * n;
    if (xproj.norm() < 1e-9) {
        // plane nearly vertical; fall back to the y axis for the in-plane reference
        xref = Eigen::Vector3d::UnitY();
        xproj = xref - xref.dot(n) * n;
    }
    const Eigen::Vector3d e1 = xproj.normalized();
    const Eigen::Vector3d e2 = n.cross(e1);
    Eigen::Matrix3d rot;
    rot.row(0) = e1.transpose();
    rot.row(1) = e2.transpose();
    rot.row(2) = n.transpose();
    return rot;
}

}  // namespace

Points to_canonical_frame(const Points& points, const BmoPlane& plane) {
    const Eigen::Matrix3d rot = canonical_rotation(plane);
    return (points.rowwise() - plane.centroid.transpose()) * rot.transpose();
}

OnhPointCloud canonicalize(const OnhPointCloud& cloud, const BmoPlane& plane) {
    OnhPointCloud out = cloud;
    out.positions = to_canonical_frame(cloud.positions, plane);
    if (cloud.bmo.rows() > 0) out.bmo = to_canonical_frame(cloud.bmo, plane);
    out.canonical = true;
    return out;
}

double squared_distance(const double* a, const double* b, Index dims) {
    double s = 0.0;
    for (Index d = 0; d < dims; ++d) {
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

std::vector<Index> knn(const FeatureMatrix& points, Index query, Index k) {
    const Index n = points.rows();
    require(query >= 0 && query < n, "knn: query index out of range");
    require(k >= 1 && k <= n - 1, "knn: k must satisfy 1 <= k <= N-1");
    std::vector<std::pair<double, Index>> cand;
    cand.reserve(static_cast<std::size_t>(n - 1));
    const double* q = points.row(query).data();
    for (Index j = 0; j < n; ++j) {
        if (j == query) continue;
        cand.emplace_back(squared_distance(q, points.row(j).data(), points.cols()), j);
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    std::vector<Index> out(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = cand[static_cast<std::size_t>(i)].second;
    return out;
}

Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
knn_graph(const FeatureMatrix& points, Index k) {
    const Index n = points.rows();
    require(k >= 1 && k <= n - 1, "knn_graph: k must satisfy 1 <= k <= N-1");
    Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(n, k);
    Eigen::VectorXd d2(n);
    std::vector<std::pair<double, Index>> cand(static_cast<std::size_t>(n - 1));
    for (Index i = 0; i < n; ++i) {
        d2 = (points.rowwise() - points.row(i)).rowwise().squaredNorm();
        std::size_t m = 0;
        for (Index j = 0; j < n; ++j) {
            if (j == i) continue;
            cand[m++] = {d2[j], j};
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        for (Index c = 0; c < k; ++c) out(i, c) = cand[static_cast<std::size_t>(c)].second;
    }
    return out;
}

Eigen::VectorXd local_thickness(const BoundarySurface& anterior, const BoundarySurface& posterior) {
    require(anterior.tissue == posterior.tissue,
            std::string("local_thickness: surfaces carry different tissue tags (") +
                tissue_name(anterior.tissue) + " vs " + tissue_name(posterior.tissue) + ")");
    require(posterior.points.rows() > 0, "local_thickness: posterior surface is empty");
    const Index na = anterior.points.rows();
    Eigen::VectorXd out(na);
    for (Index i = 0; i < na; ++i) {
        const double d2 =
            (posterior.points.rowwise() - anterior.points.row(i)).rowwise().squaredNorm().minCoeff();
        out[i] = std::sqrt(d2);
    }
    return out;
}

OnhPointCloud sample_point_cloud(const std::vector<BoundarySurface>& boundaries, Index n,
                                 std::uint64_t seed, const Points& bmo) {
    require(!boundaries.empty(), "sample_point_cloud: empty boundary list");
    require(n >= 1, "sample_point_cloud: n must be positive");

    Index total = 0;
    for (const auto& b : boundaries) total += b.points.rows();
    require(total >= 1, "sample_point_cloud: no boundary points available");
    const Index take = std::min(n, total);

    // partial Fisher-Yates over the concatenated index space; integer
    // draws only, so the selection is platform independent
    std::vector<Index> pool(static_cast<std::size_t>(total));
    std::iota(pool.begin(), pool.end(), Index{0});
    Rng rng(seed);
    for (Index i = 0; i < take; ++i) {
        const Index j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(total - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }

    // map flat pool index -> (surface, row)
    std::vector<Index> starts(boundaries.size());
    Index acc = 0;
    for (std::size_t s = 0; s < boundaries.size(); ++s) {
        starts[s] = acc;
        acc += boundaries[s].points.rows();
    }
    auto locate = [&](Index flat) {
        std::size_t s = boundaries.size() - 1;
        while (starts[s] > flat) --s;
        return std::pair<std::size_t, Index>{s, flat - starts[s]};
    };

    // posterior partner per tissue, for the thickness channel
    std::vector<int> posterior_of(8, -1);
    for (std::size_t s = 0; s < boundaries.size(); ++s)
        if (boundaries[s].role == SurfaceRole::Posterior && boundaries[s].tissue >= 0 &&
            boundaries[s].tissue < 8)
            posterior_of[static_cast<std::size_t>(boundaries[s].tissue)] = static_cast<int>(s);

    OnhPointCloud cloud;
    cloud.positions.resize(take, 3);
    cloud.thickness = Eigen::VectorXd::Zero(take);
    cloud.tissue.resize(static_cast<std::size_t>(take));
    cloud.bmo = bmo;
    for (Index i = 0; i < take; ++i) {
        const auto [s, row] = locate(pool[static_cast<std::size_t>(i)]);
        const auto& surf = boundaries[s];
        cloud.positions.row(i) = surf.points.row(row);
        cloud.tissue[static_cast<std::size_t>(i)] = surf.tissue;
        const int partner = (surf.role == SurfaceRole::Anterior && surf.tissue >= 0 && surf.tissue < 8)
                                ? posterior_of[static_cast<std::size_t>(surf.tissue)]
                                : -1;
        if (partner >= 0) {
            const auto& post = boundaries[static_cast<std::size_t>(partner)].points;
            const double d2 =
                (post.rowwise() - surf.points.row(row)).rowwise().squaredNorm().minCoeff();
            cloud.thickness[i] = std::sqrt(d2);
        }
    }
    return cloud;
}

namespace {

OnhPointCloud select_rows(const OnhPointCloud& cloud, const std::vector<Index>& rows) {
    OnhPointCloud out;
    out.positions.resize(static_cast<Index>(rows.size()), 3);
    out.thickness.resize(static_cast<Index>(rows.size()));
    out.tissue.resize(rows.size());
    out.bmo = cloud.bmo;
    out.canonical = cloud.canonical;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.positions.row(static_cast<Index>(i)) = cloud.positions.row(rows[i]);
        out.thickness[static_cast<Index>(i)] = cloud.thickness[rows[i]];
        out.tissue[i] = cloud.tissue[static_cast<std::size_t>(rows[i])];
    }
    return out;
}

}  // namespace

OnhPointCloud augment(const OnhPointCloud& cloud, const AugmentationConfig& cfg) {
    require(cloud.size() > 0, "augment: empty cloud");
    require(cfg.crop_fraction > 0.0 && cfg.crop_fraction <= 1.0,
            "augment: crop_fraction must lie in (0,1]");
    require(cfg.subsample_count >= 1, "augment: subsample_count must be >= 1");
    require(cfg.noise_sigma_mm >= 0.0, "augment: noise sigma must be >= 0");
    Rng rng(cfg.seed);
    OnhPointCloud out = cloud;

    if (cfg.enable_crop && cfg.crop_fraction < 1.0) {
        const Eigen::RowVector3d lo = out.positions.colwise().minCoeff();
        const Eigen::RowVector3d hi = out.positions.colwise().maxCoeff();
        const Eigen::RowVector3d extent = hi - lo;
        Eigen::RowVector3d size = extent * cfg.crop_fraction;
        Eigen::RowVector3d origin;
        for (int a = 0; a < 3; ++a) origin[a] = lo[a] + rng.unit() * (extent[a] - size[a]);
        std::vector<Index> keep;
        for (Index i = 0; i < out.size(); ++i) {
            bool inside = true;
            for (int a = 0; a < 3; ++a)
                inside = inside && out.positions(i, a) >= origin[a] &&
                         out.positions(i, a) <= origin[a] + size[a];
            if (inside) keep.push_back(i);
        }
        if (!keep.empty()) out = select_rows(out, keep);
    }

    if (cfg.enable_subsample && cfg.subsample_count < out.size()) {
        const Index m = cfg.subsample_count;
        std::vector<Index> idx(static_cast<std::size_t>(out.size()));
        std::iota(idx.begin(), idx.end(), Index{0});
        for (Index i = 0; i < m; ++i) {
            const Index j =
                i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(out.size() - i)));
            std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        }
        idx.resize(static_cast<std::size_t>(m));
        out = select_rows(out, idx);
    }

    if (cfg.enable_rotation && cfg.rotation_deg != 0.0) {
        const double ang = rng.uniform(-cfg.rotation_deg, cfg.rotation_deg) * M_PI / 180.0;
        Eigen::Matrix3d rot = Eigen::AngleAxisd(ang, Eigen::Vector3d::UnitZ()).toRotationMatrix();
        out.positions = out.positions * rot.transpose();
        if (out.bmo.rows() > 0) out.bmo = out.bmo * rot.transpose();
    }

    if (cfg.enable_translation && cfg.translation_mm != 0.0) {
        Eigen::RowVector3d t;
        for (int a = 0; a < 3; ++a) t[a] = rng.uniform(-cfg.translation_mm, cfg.translation_mm);
        out.positions.rowwise() += t;
        if (out.bmo.rows() > 0) out.bmo.rowwise() += t;
    }

    if (cfg.enable_noise && cfg.noise_sigma_mm > 0.0) {
        for (Index i = 0; i < out.size(); ++i)
            for (int a = 0; a < 3; ++a) out.positions(i, a) += rng.normal(0.0, cfg.noise_sigma_mm);
    }

    return out;
}

void write_pointcloud_csv(const std::string& path, const OnhPointCloud& cloud) {
    std::string s = "x_mm,y_mm,z_mm,thickness_mm,tissue_id\n";
    char buf[128];
    for (Index i = 0; i < cloud.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%d\n", cloud.positions(i, 0),
                      cloud.positions(i, 1), cloud.positions(i, 2), cloud.thickness[i],
                      cloud.tissue[static_cast<std::size_t>(i)]);
        s += buf;
    }
    write_file(path, s);
}

OnhPointCloud read_pointcloud_csv(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "read_pointcloud_csv: empty file " + path);
    require(line == "x_mm,y_mm,z_mm,thickness_mm,tissue_id",
            "read_pointcloud_csv: unexpected header in " + path);
    std::vector<double> xs, ys, zs, ts;
    std::vector<int> tissues;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double x, y, z, t;
        int tissue;
        require(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%d", &x, &y, &z, &t, &tissue) == 5,
                "read_pointcloud_csv: malformed row in " + path + ": " + line);
        xs.push_back(x);
        ys.push_back(y);
        zs.push_back(z);
        ts.push_back(t);
        tissues.push_back(tissue);
    }
    OnhPointCloud cloud;
    const Index n = static_cast<Index>(xs.size());
    cloud.positions.resize(n, 3);
    cloud.thickness.resize(n);
    cloud.tissue = tissues;
    for (Index i = 0; i < n; ++i) {
        cloud.positions(i, 0) = xs[static_cast<std::size_t>(i)];
        cloud.positions(i, 1) = ys[static_cast<std::size_t>(i)];
        cloud.positions(i, 2) = zs[static_cast<std::size_t>(i)];
        cloud.thickness[i] = ts[static_cast<std::size_t>(i)];
    }
    return cloud;
}

void write_pointcloud_ply(const std::string& path, const OnhPointCloud& cloud) {
    std::ostringstream os;
    os << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
       << "\nproperty double x\nproperty double y\nproperty double z\n"
          "property double thickness\nproperty int tissue\nend_header\n";
    char buf[160];
    for (Index i = 0; i < cloud.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g %d\n", cloud.positions(i, 0),
                      cloud.positions(i, 1), cloud.positions(i, 2), cloud.thickness[i],
                      cloud.tissue[static_cast<std::size_t>(i)]);
        os << buf;
    }
    write_file(path, os.str());
}

}  // namespace onh::geom
