#include "onh/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>

#include "json.hpp"

namespace onh::baselines {

namespace {

constexpr double kPi = 3.14159265358979323846;

int octant_of(double x, double y) {
    double angle = std::atan2(y, x);
    if (angle < 0.0) angle += 2.0 * kPi;
    const int oct = static_cast<int>(angle / (kPi / 4.0));
    return std::min(oct, 7);
}

const geom::BoundarySurface* find_surface(const std::vector<geom::BoundarySurface>& surfaces,
                                          int tissue, geom::SurfaceRole role) {
    for (const auto& s : surfaces)
        if (s.tissue == tissue && s.role == role) return &s;
    return nullptr;
}

const geom::BoundarySurface& need_surface(const std::vector<geom::BoundarySurface>& surfaces,
                                          int tissue, geom::SurfaceRole role) {
    const auto* s = find_surface(surfaces, tissue, role);
    if (!s)
        fail(std::string("extract_structural_parameters: missing ") +
             (role == geom::SurfaceRole::Posterior ? "posterior" : "anterior") + " surface of " +
             geom::tissue_name(tissue));
    return *s;
}

double min_distance_to(const geom::Points& pts, const Eigen::RowVector3d& q) {
    return std::sqrt((pts.rowwise() - q).rowwise().squaredNorm().minCoeff());
}

/// z of the surface point laterally closest to (x, y).
double surface_z_at(const geom::Points& pts, double x, double y) {
    Index best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < pts.rows(); ++i) {
        const double dx = pts(i, 0) - x, dy = pts(i, 1) - y;
        const double d = dx * dx + dy * dy;
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return pts(best, 2);
}

}  // namespace

Eigen::Matrix<double, StructuralParameterVector::kCount, 1> StructuralParameterVector::flatten() const {
    Eigen::Matrix<double, kCount, 1> v;
    for (int i = 0; i < 8; ++i) v[i] = rim_width_mm[static_cast<std::size_t>(i)];
    for (int i = 0; i < 8; ++i) v[8 + i] = rnfl_mm[static_cast<std::size_t>(i)];
    for (int i = 0; i < 8; ++i) v[16 + i] = gcl_ipl_mm[static_cast<std::size_t>(i)];
    v[24] = prelamina_depth_mm;
    v[25] = min_prelamina_thickness_mm;
    v[26] = lc_depth_mm;
    v[27] = lc_shape_index;
    v[28] = bmo_area_mm2;
    return v;
}

const std::array<const char*, StructuralParameterVector::kCount>& StructuralParameterVector::names() {
    static const std::array<const char*, kCount> n = {
        "rim_width_oct0", "rim_width_oct1", "rim_width_oct2", "rim_width_oct3",
        "rim_width_oct4", "rim_width_oct5", "rim_width_oct6", "rim_width_oct7",
        "rnfl_oct0",      "rnfl_oct1",      "rnfl_oct2",      "rnfl_oct3",
        "rnfl_oct4",      "rnfl_oct5",      "rnfl_oct6",      "rnfl_oct7",
        "gcl_ipl_oct0",   "gcl_ipl_oct1",   "gcl_ipl_oct2",   "gcl_ipl_oct3",
        "gcl_ipl_oct4",   "gcl_ipl_oct5",   "gcl_ipl_oct6",   "gcl_ipl_oct7",
        "prelamina_depth", "min_prelamina_thickness", "lc_depth", "lc_shape_index", "bmo_area"};
    return n;
}

StructuralParameterVector extract_structural_parameters(
    const std::vector<geom::BoundarySurface>& canonical_surfaces, const geom::Points& canonical_bmo) {
    require(canonical_bmo.rows() >= 3, "extract_structural_parameters: need BMO points");
    const auto& ilm = need_surface(canonical_surfaces, geom::kRnflPlt, geom::SurfaceRole::Anterior);
    const auto& gcl_ant = need_surface(canonical_surfaces, geom::kGclIpl, geom::SurfaceRole::Anterior);
    const auto& orl_ant = need_surface(canonical_surfaces, geom::kOrl, geom::SurfaceRole::Anterior);
    const auto& lc_ant =
        need_surface(canonical_surfaces, geom::kLaminaCribrosa, geom::SurfaceRole::Anterior);

    StructuralParameterVector out;

    const double r_bmo = canonical_bmo.leftCols(2).rowwise().norm().mean();

    // (1) minimum rim width per octant: BMO point to nearest ILM point
    {
        std::array<double, 8> sum{};
        std::array<int, 8> cnt{};
        for (Index i = 0; i < canonical_bmo.rows(); ++i) {
            const int oct = octant_of(canonical_bmo(i, 0), canonical_bmo(i, 1));
            sum[static_cast<std::size_t>(oct)] += min_distance_to(ilm.points, canonical_bmo.row(i));
            cnt[static_cast<std::size_t>(oct)] += 1;
        }
        for (int o = 0; o < 8; ++o)
            out.rim_width_mm[static_cast<std::size_t>(o)] =
                cnt[static_cast<std::size_t>(o)] ? sum[static_cast<std::size_t>(o)] / cnt[static_cast<std::size_t>(o)] : 0.0;
    }

    // (2)(3) layer thicknesses along the plane normal on the 1.5 r_bmo circle
    {
        constexpr int kAngles = 96;
        std::array<double, 8> rnfl_sum{}, gcl_sum{};
        std::array<int, 8> cnt{};
        for (int a = 0; a < kAngles; ++a) {
            const double theta = 2.0 * kPi * a / kAngles;
            const double x = 1.5 * r_bmo * std::cos(theta);
            const double y = 1.5 * r_bmo * std::sin(theta);
            const double z_ilm = surface_z_at(ilm.points, x, y);
            const double z_gcl = surface_z_at(gcl_ant.points, x, y);
            const double z_orl = surface_z_at(orl_ant.points, x, y);
            const int oct = octant_of(x, y);
            rnfl_sum[static_cast<std::size_t>(oct)] += std::max(0.0, z_ilm - z_gcl);
            gcl_sum[static_cast<std::size_t>(oct)] += std::max(0.0, z_gcl - z_orl);
            cnt[static_cast<std::size_t>(oct)] += 1;
        }
        for (int o = 0; o < 8; ++o) {
            out.rnfl_mm[static_cast<std::size_t>(o)] = rnfl_sum[static_cast<std::size_t>(o)] / cnt[static_cast<std::size_t>(o)];
            out.gcl_ipl_mm[static_cast<std::size_t>(o)] = gcl_sum[static_cast<std::size_t>(o)] / cnt[static_cast<std::size_t>(o)];
        }
    }

    // (4) prelamina depth: ILM point on the canal axis, measured down the
    // plane normal (positive posterior)
    out.prelamina_depth_mm = -surface_z_at(ilm.points, 0.0, 0.0);

    // (5) minimum prelaminar tissue thickness over the central canal
    {
        double best = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < ilm.points.rows(); ++i) {
            const double rho = std::hypot(ilm.points(i, 0), ilm.points(i, 1));
            if (rho > 0.8 * r_bmo) continue;
            best = std::min(best, min_distance_to(lc_ant.points, ilm.points.row(i)));
        }
        require(std::isfinite(best),
                "extract_structural_parameters: no ILM points above the canal");
        out.min_prelamina_thickness_mm = best;
    }

    // (6) LC depth below the BMO plane at the canal axis
    out.lc_depth_mm = -surface_z_at(lc_ant.points, 0.0, 0.0);

    // (7) global shape index from a quadric fit of the central anterior LC
    {
        std::vector<Index> rows;
        for (Index i = 0; i < lc_ant.points.rows(); ++i) {
            const double rho = std::hypot(lc_ant.points(i, 0), lc_ant.points(i, 1));
            if (rho <= 0.9 * r_bmo) rows.push_back(i);
        }
        if (rows.size() < 6) {
            rows.resize(static_cast<std::size_t>(lc_ant.points.rows()));
            std::iota(rows.begin(), rows.end(), Index{0});
        }
        require(rows.size() >= 6, "extract_structural_parameters: too few anterior LC points");
        Eigen::MatrixXd design(static_cast<Index>(rows.size()), 6);
        Eigen::VectorXd target(static_cast<Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double x = lc_ant.points(rows[i], 0), y = lc_ant.points(rows[i], 1);
            design.row(static_cast<Index>(i)) << 1.0, x, y, x * x, x * y, y * y;
            target[static_cast<Index>(i)] = lc_ant.points(rows[i], 2);
        }
        const Eigen::VectorXd c = design.colPivHouseholderQr().solve(target);
        const double p = c[1], q = c[2];
        const double fxx = 2.0 * c[3], fxy = c[4], fyy = 2.0 * c[5];
        const double w = std::sqrt(1.0 + p * p + q * q);
        Eigen::Matrix2d first;
        first << 1.0 + p * p, p * q, p * q, 1.0 + q * q;
        Eigen::Matrix2d second;
        second << fxx / w, fxy / w, fxy / w, fyy / w;
        const Eigen::Matrix2d weingarten = first.inverse() * second;
        const double tr = weingarten.trace();
        const double det = weingarten.determinant();
        const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
        const double k1 = 0.5 * (tr + disc);
        const double k2 = 0.5 * (tr - disc);
        if (std::abs(k1) < 1e-6 && std::abs(k2) < 1e-6) {
            out.lc_shape_index = 0.0;
        } else if (k1 - k2 < 1e-12 * std::max(1.0, std::abs(k1 + k2))) {
            out.lc_shape_index = (k1 + k2) > 0.0 ? 1.0 : -1.0;
        } else {
            out.lc_shape_index = (2.0 / kPi) * std::atan((k1 + k2) / (k1 - k2));
        }
    }

    // (8) BMO area: shoelace over the plane-projected points ordered by angle
    {
        std::vector<Index> order(static_cast<std::size_t>(canonical_bmo.rows()));
        std::iota(order.begin(), order.end(), Index{0});
        std::sort(order.begin(), order.end(), [&](Index a, Index b) {
            return std::atan2(canonical_bmo(a, 1), canonical_bmo(a, 0)) <
                   std::atan2(canonical_bmo(b, 1), canonical_bmo(b, 0));
        });
        double acc = 0.0;
        for (std::size_t i = 0; i < order.size(); ++i) {
            const Index a = order[i];
            const Index b = order[(i + 1) % order.size()];
            acc += canonical_bmo(a, 0) * canonical_bmo(b, 1) - canonical_bmo(b, 0) * canonical_bmo(a, 1);
        }
        out.bmo_area_mm2 = 0.5 * std::abs(acc);
    }

    return out;
}

void write_features_csv(const std::string& path, const std::vector<std::string>& ids,
                        const std::vector<StructuralParameterVector>& rows) {
    require(ids.size() == rows.size(), "write_features_csv: ids and rows differ in count");
    std::string s = "id";
    for (const char* name : StructuralParameterVector::names()) s += std::string(",") + name;
    s += "\n";
    char buf[64];
    for (std::size_t r = 0; r < rows.size(); ++r) {
        s += ids[r];
        const auto v = rows[r].flatten();
        for (int i = 0; i < StructuralParameterVector::kCount; ++i) {
            std::snprintf(buf, sizeof(buf), ",%.17g", v[i]);
            s += buf;
        }
        s += "\n";
    }
    write_file(path, s);
}

// ---- random forest ----

namespace {

double gini(const std::array<int, 2>& counts) {
    const int n = counts[0] + counts[1];
    if (n == 0) return 0.0;
    const double p0 = static_cast<double>(counts[0]) / n;
    const double p1 = static_cast<double>(counts[1]) / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// best (gain, lowest feature, lowest threshold) split over the given
// features; thresholds are midpoints of consecutive distinct values
SplitChoice best_split(const geom::FeatureMatrix& X, const std::vector<int>& y,
                       const std::vector<Index>& samples, const std::vector<int>& features) {
    std::array<int, 2> parent{0, 0};
    for (Index s : samples) parent[static_cast<std::size_t>(y[static_cast<std::size_t>(s)])] += 1;
    const double parent_gini = gini(parent);
    const auto n = static_cast<double>(samples.size());

    SplitChoice best;
    std::vector<std::pair<double, int>> vals(samples.size());
    for (int f : features) {
        for (std::size_t i = 0; i < samples.size(); ++i)
            vals[i] = {X(samples[i], f), y[static_cast<std::size_t>(samples[i])]};
        std::sort(vals.begin(), vals.end());
        std::array<int, 2> left{0, 0};
        std::array<int, 2> right = parent;
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            left[static_cast<std::size_t>(vals[i].second)] += 1;
            right[static_cast<std::size_t>(vals[i].second)] -= 1;
            if (vals[i].first == vals[i + 1].first) continue;
            const double nl = static_cast<double>(i + 1);
            const double gain = parent_gini - (nl / n) * gini(left) - ((n - nl) / n) * gini(right);
            if (gain > best.gain) {
                best.found = true;
                best.gain = gain;
                best.feature = f;
                best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
            }
        }
    }
    return best;
}

int grow_tree(DecisionTree& tree, const geom::FeatureMatrix& X, const std::vector<int>& y,
              std::vector<Index> samples, int features_per_node, Rng& rng) {
    TreeNode node;
    for (Index s : samples) node.class_counts[static_cast<std::size_t>(y[static_cast<std::size_t>(s)])] += 1;
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(node);

    const bool pure = node.class_counts[0] == 0 || node.class_counts[1] == 0;
    if (pure || samples.size() < 2) return id;

    const int n_features = static_cast<int>(X.cols());
    std::vector<int> features(static_cast<std::size_t>(n_features));
    std::iota(features.begin(), features.end(), 0);
    if (features_per_node < n_features) {
        for (int i = 0; i < features_per_node; ++i) {
            const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_features - i)));
            std::swap(features[static_cast<std::size_t>(i)], features[static_cast<std::size_t>(j)]);
        }
        features.resize(static_cast<std::size_t>(features_per_node));
        std::sort(features.begin(), features.end());
    }

    const SplitChoice split = best_split(X, y, samples, features);
    if (!split.found) return id;  // constant features among the candidates

    std::vector<Index> left, right;
    for (Index s : samples) {
        if (X(s, split.feature) <= split.threshold)
            left.push_back(s);
        else
            right.push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();

    tree.nodes[static_cast<std::size_t>(id)].feature = split.feature;
    tree.nodes[static_cast<std::size_t>(id)].threshold = split.threshold;
    const int l = grow_tree(tree, X, y, std::move(left), features_per_node, rng);
    tree.nodes[static_cast<std::size_t>(id)].left = l;
    const int r = grow_tree(tree, X, y, std::move(right), features_per_node, rng);
    tree.nodes[static_cast<std::size_t>(id)].right = r;
    return id;
}

int tree_vote(const DecisionTree& tree, const Eigen::VectorXd& x) {
    int node = 0;
    for (;;) {
        const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
        if (n.feature < 0) return n.class_counts[1] > n.class_counts[0] ? 1 : 0;
        node = x[n.feature] <= n.threshold ? n.left : n.right;
    }
}

}  // namespace

RandomForest train_random_forest(const geom::FeatureMatrix& features, const std::vector<int>& labels,
                                 const RandomForestOptions& opts) {
    const Index m = features.rows();
    require(m >= 2, "train_random_forest: need at least 2 samples");
    require(static_cast<Index>(labels.size()) == m, "train_random_forest: label count mismatch");
    bool has0 = false, has1 = false;
    for (int l : labels) {
        require(l == 0 || l == 1, "train_random_forest: labels must be 0 or 1");
        (l ? has1 : has0) = true;
    }
    require(has0 && has1, "train_random_forest: both classes must be present");
    require(opts.n_trees >= 1, "train_random_forest: need at least one tree");

    const int n_features = static_cast<int>(features.cols());
    int per_node = opts.features_per_node > 0
                       ? opts.features_per_node
                       : static_cast<int>(std::floor(std::sqrt(static_cast<double>(n_features))));
    per_node = std::min(per_node, n_features);

    RandomForest forest;
    forest.n_features = n_features;
    forest.seed = opts.seed;
    forest.trees.resize(static_cast<std::size_t>(opts.n_trees));
    Rng base(opts.seed);
    parallel_for(static_cast<std::size_t>(opts.n_trees), 1, [&](std::size_t t) {
        Rng rng = base.fork(t);
        std::vector<Index> samples(static_cast<std::size_t>(m));
        if (opts.bootstrap) {
            for (Index i = 0; i < m; ++i)
                samples[static_cast<std::size_t>(i)] =
                    static_cast<Index>(rng.below(static_cast<std::uint64_t>(m)));
        } else {
            std::iota(samples.begin(), samples.end(), Index{0});
        }
        grow_tree(forest.trees[t], features, labels, std::move(samples), per_node, rng);
    });
    return forest;
}

double rf_predict(const RandomForest& forest, const Eigen::VectorXd& features) {
    require(!forest.trees.empty(), "rf_predict: forest is not trained");
    require(static_cast<int>(features.size()) == forest.n_features,
            "rf_predict: feature count mismatch");
    int fragile = 0;
    for (const auto& tree : forest.trees) fragile += tree_vote(tree, features);
    return static_cast<double>(fragile) / static_cast<double>(forest.trees.size());
}

void save_forest_json(const std::string& path, const RandomForest& forest) {
    nlohmann::ordered_json j;
    j["format"] = "onh-forest-v1";
    j["n_features"] = forest.n_features;
    j["seed"] = forest.seed;
    auto trees = nlohmann::ordered_json::array();
    for (const auto& tree : forest.trees) {
        auto nodes = nlohmann::ordered_json::array();
        for (const auto& n : tree.nodes)
            nodes.push_back({{"f", n.feature},
                             {"thr", n.threshold},
                             {"l", n.left},
                             {"r", n.right},
                             {"counts", n.class_counts}});
        trees.push_back({{"nodes", nodes}});
    }
    j["trees"] = trees;
    write_file(path, j.dump() + "\n");
}

RandomForest load_forest_json(const std::string& path) {
    const auto j = nlohmann::json::parse(read_file(path));
    require(j.at("format") == "onh-forest-v1", "load_forest_json: unknown format in " + path);
    RandomForest forest;
    forest.n_features = j.at("n_features").get<int>();
    forest.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& tj : j.at("trees")) {
        DecisionTree tree;
        for (const auto& nj : tj.at("nodes")) {
            TreeNode n;
            n.feature = nj.at("f").get<int>();
            n.threshold = nj.at("thr").get<double>();
            n.left = nj.at("l").get<int>();
            n.right = nj.at("r").get<int>();
            n.class_counts = nj.at("counts").get<std::array<int, 2>>();
            tree.nodes.push_back(n);
        }
        forest.trees.push_back(std::move(tree));
    }
    return forest;
}

// ---- autoencoder ----

Section extract_central_section(const phantom::SegmentedVolume& volume, Index raster_width,
                                Index raster_height) {
    require(volume.voxels() > 0, "extract_central_section: empty volume");
    require(raster_width >= 1 && raster_height >= 1, "extract_central_section: bad raster");
    require(volume.bmo.rows() > 0, "extract_central_section: volume has no BMO points");
    // B-scan closest to the BMO center: world y back to scan row
    const double y_center = volume.bmo.col(1).mean();
    Index ib = static_cast<Index>(std::floor(y_center / volume.spacing_mm[0]));
    ib = std::clamp<Index>(ib, 0, volume.dims[0] - 1);

    Section s;
    s.width = raster_width;
    s.height = raster_height;
    s.classes.resize(static_cast<std::size_t>(raster_width * raster_height));
    for (Index u = 0; u < raster_width; ++u) {
        const Index ia = std::min(volume.dims[1] - 1,
                                  (2 * u + 1) * volume.dims[1] / (2 * raster_width));
        for (Index v = 0; v < raster_height; ++v) {
            const Index id = std::min(volume.dims[2] - 1,
                                      (2 * v + 1) * volume.dims[2] / (2 * raster_height));
            s.classes[static_cast<std::size_t>(u * raster_height + v)] = volume.at(ib, ia, id);
        }
    }
    return s;
}

namespace {

ad::DenseArray one_hot_input(const Section& s, Index classes) {
    const Index pixels = s.width * s.height;
    ad::DenseArray x(ad::Shape{1, pixels * classes});
    for (Index p = 0; p < pixels; ++p) {
        const auto cls = static_cast<Index>(s.classes[static_cast<std::size_t>(p)]);
        require(cls < classes, "autoencoder: section class exceeds configured class count");
        x.flat()[p * classes + cls] = 1.0;
    }
    return x;
}

std::vector<ad::Index> pixel_targets(const Section& s) {
    std::vector<ad::Index> t(s.classes.size());
    for (std::size_t i = 0; i < s.classes.size(); ++i) t[i] = s.classes[i];
    return t;
}

struct AeGraph {
    ad::Graph graph;
    int latent = -1;
    int loss = -1;
};

AeGraph build_ae_graph(const Section& s, const AutoencoderConfig& cfg, const ad::ParamStore& params) {
    const Index pixels = s.width * s.height;
    AeGraph ag;
    ad::Graph& g = ag.graph;
    std::map<std::string, int> ids;
    for (const std::string& name : {std::string("enc.w"), std::string("enc.b"),
                                    std::string("dec.w"), std::string("dec.b")}) {
        ids[name] = g.input(name, params.at(name).shape());
        g.bind(name, params.at(name));
    }
    const int x = g.constant(one_hot_input(s, cfg.classes));
    ag.latent = g.leaky_relu(g.add_rowvec(g.matmul(x, ids["enc.w"]), ids["enc.b"]), cfg.leaky_slope);
    const int logits_flat = g.add_rowvec(g.matmul(ag.latent, ids["dec.w"]), ids["dec.b"]);
    const int logits = g.reshape(logits_flat, ad::Shape{pixels, cfg.classes});
    ag.loss = g.softmax_cross_entropy(logits, pixel_targets(s));
    return ag;
}

Eigen::RowVectorXd encode(const AutoencoderModel& model, const Section& s) {
    AeGraph ag = build_ae_graph(s, model.config, model.params);
    return ag.graph.value(ag.latent).mat();
}

}  // namespace

AutoencoderModel train_autoencoder(const std::vector<Section>& sections,
                                   const AutoencoderConfig& cfg, int jobs) {
    require(!sections.empty(), "train_autoencoder: empty section set");
    const Index pixels = cfg.raster[0] * cfg.raster[1];
    for (const auto& s : sections)
        require(s.width == cfg.raster[0] && s.height == cfg.raster[1],
                "train_autoencoder: section raster does not match the config");
    const Index d_in = pixels * cfg.classes;

    AutoencoderModel model;
    model.config = cfg;
    Rng rng(cfg.seed);
    auto init = [&](ad::Shape shape, Index fan_in) {
        ad::DenseArray a(std::move(shape));
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (Index i = 0; i < a.size(); ++i) a.flat()[i] = rng.uniform(-limit, limit);
        return a;
    };
    model.params.add("enc.w", init({d_in, cfg.latent}, d_in));
    model.params.add("enc.b", ad::DenseArray(ad::Shape{cfg.latent}));
    model.params.add("dec.w", init({cfg.latent, d_in}, cfg.latent));
    model.params.add("dec.b", ad::DenseArray(ad::Shape{d_in}));

    std::map<std::string, ad::AdamState> adam;
    for (const std::string& name : model.params.names())
        adam[name] = ad::AdamState::for_param(model.params.at(name));
    ad::AdamConfig adam_cfg;
    adam_cfg.lr = cfg.learning_rate;

    const std::size_t n = sections.size();
    for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng epoch_rng = rng.fork(static_cast<std::uint64_t>(epoch) + 1);
        const std::vector<std::size_t> order = epoch_rng.permutation(n);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<double> losses(stop - start);
            std::vector<std::map<std::string, ad::DenseArray>> grads(stop - start);
            parallel_for(stop - start, jobs, [&](std::size_t b) {
                AeGraph ag = build_ae_graph(sections[order[start + b]], cfg, model.params);
                auto eval = ag.graph.evaluate_with_gradients(ag.loss);
                losses[b] = eval.value.scalar_value();
                grads[b] = std::move(eval.gradients);
            });
            std::map<std::string, ad::DenseArray> acc;
            for (std::size_t b = 0; b < losses.size(); ++b) {
                if (!std::isfinite(losses[b]))
                    fail("train_autoencoder: non-finite loss at epoch " + std::to_string(epoch));
                loss_sum += losses[b];
                for (auto& [name, grad] : grads[b]) {
                    auto it = acc.find(name);
                    if (it == acc.end())
                        acc.emplace(name, std::move(grad));
                    else
                        it->second.flat() += grad.flat();
                }
            }
            const double inv = 1.0 / static_cast<double>(losses.size());
            for (const std::string& name : model.params.names()) {
                auto& grad = acc.at(name);
                grad.flat() *= inv;
                ad::adam_step(model.params.at(name), grad, adam.at(name), adam_cfg, name);
            }
        }
        model.loss_history.push_back(loss_sum / static_cast<double>(n));
    }
    model.trained = true;
    return model;
}

Section reconstruct(const AutoencoderModel& model, const Section& section) {
    require(model.trained, "reconstruct: autoencoder is not trained");
    AeGraph ag = build_ae_graph(section, model.config, model.params);
    // decoder logits node is two before the loss (reshape output)
    const Eigen::RowVectorXd z = ag.graph.value(ag.latent).mat();
    const Index pixels = section.width * section.height;
    Eigen::RowVectorXd logits = z * model.params.at("dec.w").mat();
    Eigen::Map<const Eigen::RowVectorXd> dec_b(model.params.at("dec.b").flat().data(),
                                               model.params.at("dec.b").size());
    logits += dec_b;
    Section out;
    out.width = section.width;
    out.height = section.height;
    out.classes.resize(static_cast<std::size_t>(pixels));
    for (Index p = 0; p < pixels; ++p) {
        Index best = 0;
        double bv = logits[p * model.config.classes];
        for (Index c = 1; c < model.config.classes; ++c) {
            const double v = logits[p * model.config.classes + c];
            if (v > bv) {
                bv = v;
                best = c;
            }
        }
        out.classes[static_cast<std::size_t>(p)] = static_cast<std::uint8_t>(best);
    }
    return out;
}

namespace {

struct MlpGraph {
    ad::Graph graph;
    int logits = -1;
    int loss = -1;
};

MlpGraph build_mlp_graph(const Eigen::RowVectorXd& latent, int label, const AutoencoderConfig& cfg,
                         const ad::ParamStore& mlp) {
    MlpGraph mg;
    ad::Graph& g = mg.graph;
    std::map<std::string, int> ids;
    for (const std::string& name : mlp.names()) {
        ids[name] = g.input(name, mlp.at(name).shape());
        g.bind(name, mlp.at(name));
    }
    ad::DenseArray z(ad::Shape{1, latent.size()});
    z.mat() = latent;
    int x = g.constant(std::move(z));
    const std::size_t layers = cfg.mlp_hidden.size() + 1;
    for (std::size_t i = 0; i < layers; ++i) {
        const std::string w = "mlp" + std::to_string(i) + ".w";
        const std::string b = "mlp" + std::to_string(i) + ".b";
        x = g.add_rowvec(g.matmul(x, ids.at(w)), ids.at(b));
        if (i + 1 < layers) x = g.leaky_relu(x, cfg.leaky_slope);
    }
    mg.logits = x;
    if (label >= 0) mg.loss = g.softmax_cross_entropy(x, {label});
    return mg;
}

}  // namespace

AeClassifier train_ae_classifier(const AutoencoderModel& model,
                                 const std::vector<LabeledSection>& train_set,
                                 const std::vector<LabeledSection>& val_set, int jobs) {
    require(model.trained, "train_ae_classifier: encoder is not trained");
    require(!train_set.empty() && !val_set.empty(), "train_ae_classifier: empty data");
    const AutoencoderConfig& cfg = model.config;

    // frozen encoder: latents are fixed, compute them once
    std::vector<Eigen::RowVectorXd> train_z(train_set.size()), val_z(val_set.size());
    parallel_for(train_set.size(), jobs,
                 [&](std::size_t i) { train_z[i] = encode(model, train_set[i].section); });
    parallel_for(val_set.size(), jobs,
                 [&](std::size_t i) { val_z[i] = encode(model, val_set[i].section); });

    AeClassifier clf;
    clf.autoencoder = model;

    Rng rng(cfg.seed ^ 0xae5eedull);
    std::vector<Index> widths{cfg.latent};
    widths.insert(widths.end(), cfg.mlp_hidden.begin(), cfg.mlp_hidden.end());
    widths.push_back(2);
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        const Index fan_in = widths[i];
        ad::DenseArray w(ad::Shape{widths[i], widths[i + 1]});
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (Index j = 0; j < w.size(); ++j) w.flat()[j] = rng.uniform(-limit, limit);
        clf.mlp.add("mlp" + std::to_string(i) + ".w", std::move(w));
        clf.mlp.add("mlp" + std::to_string(i) + ".b", ad::DenseArray(ad::Shape{widths[i + 1]}));
    }

    std::map<std::string, ad::AdamState> adam;
    for (const std::string& name : clf.mlp.names())
        adam[name] = ad::AdamState::for_param(clf.mlp.at(name));
    ad::AdamConfig adam_cfg;
    adam_cfg.lr = cfg.mlp_learning_rate;

    auto val_loss = [&] {
        double total = 0.0;
        for (std::size_t i = 0; i < val_set.size(); ++i) {
            MlpGraph mg = build_mlp_graph(val_z[i], val_set[i].label, cfg, clf.mlp);
            total += mg.graph.value(mg.loss).scalar_value();
        }
        return total / static_cast<double>(val_set.size());
    };

    ad::ParamStore best = clf.mlp;
    double best_val = std::numeric_limits<double>::infinity();
    Index stale = 0;
    const std::size_t n = train_set.size();
    for (Index epoch = 0; epoch < cfg.mlp_epochs; ++epoch) {
        Rng epoch_rng = rng.fork(static_cast<std::uint64_t>(epoch) + 1);
        const std::vector<std::size_t> order = epoch_rng.permutation(n);
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
            std::map<std::string, ad::DenseArray> acc;
            for (std::size_t b = start; b < stop; ++b) {
                MlpGraph mg = build_mlp_graph(train_z[order[b]], train_set[order[b]].label, cfg, clf.mlp);
                auto eval = mg.graph.evaluate_with_gradients(mg.loss);
                if (!std::isfinite(eval.value.scalar_value()))
                    fail("train_ae_classifier: non-finite loss at epoch " + std::to_string(epoch));
                for (auto& [name, grad] : eval.gradients) {
                    auto it = acc.find(name);
                    if (it == acc.end())
                        acc.emplace(name, std::move(grad));
                    else
                        it->second.flat() += grad.flat();
                }
            }
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (const std::string& name : clf.mlp.names()) {
                auto& grad = acc.at(name);
                grad.flat() *= inv;
                ad::adam_step(clf.mlp.at(name), grad, adam.at(name), adam_cfg, name);
            }
        }
        const double vl = val_loss();
        if (vl < best_val - 1e-12) {
            best_val = vl;
            best = clf.mlp;
            stale = 0;
        } else if (++stale >= cfg.mlp_patience) {
            break;
        }
    }
    clf.mlp = best;
    return clf;
}

double ae_classify(const AeClassifier& clf, const Section& section) {
    require(clf.autoencoder.trained, "ae_classify: encoder is not trained");
    const Eigen::RowVectorXd z = encode(clf.autoencoder, section);
    MlpGraph mg = build_mlp_graph(z, -1, clf.autoencoder.config, clf.mlp);
    const auto& logits = mg.graph.value(mg.logits);
    const double a = logits.mat()(0, 0), b = logits.mat()(0, 1);
    const double m = std::max(a, b);
    return std::exp(b - m) / (std::exp(a - m) + std::exp(b - m));
}

double dice(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    require(a.size() == b.size(), "dice: masks differ in shape");
    std::array<Index, 256> count_a{}, count_b{}, overlap{};
    for (std::size_t i = 0; i < a.size(); ++i) {
        count_a[a[i]] += 1;
        count_b[b[i]] += 1;
        if (a[i] == b[i]) overlap[a[i]] += 1;
    }
    double total = 0.0;
    int classes = 0;
    for (int c = 1; c < 256; ++c) {  // class 0 = background, excluded
        const Index denom = count_a[static_cast<std::size_t>(c)] + count_b[static_cast<std::size_t>(c)];
        if (denom == 0) continue;
        total += 2.0 * static_cast<double>(overlap[static_cast<std::size_t>(c)]) /
                 static_cast<double>(denom);
        classes += 1;
    }
    require(classes > 0, "dice: masks contain no foreground classes");
    return total / classes;
}

}  // namespace onh::baselines
