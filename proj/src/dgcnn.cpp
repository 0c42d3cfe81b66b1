#include "onh/dgcnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

namespace onh::dgcnn {

void DgcnnConfig::validate() const {
    require(k >= 1, "DgcnnConfig: k must be >= 1");
    require(!edge_channels.empty(), "DgcnnConfig: need at least one EdgeConv layer");
    for (Index c : edge_channels) require(c >= 1, "DgcnnConfig: EdgeConv widths must be positive");
    require(aggregation_width >= 1, "DgcnnConfig: aggregation width must be >= 1");
    require(!head_widths.empty() && head_widths.back() == 2,
            "DgcnnConfig: head must end in 2 classes");
    require(leaky_slope >= 0.0 && leaky_slope < 1.0, "DgcnnConfig: slope must lie in [0,1)");
    require(input_channels == 4, "DgcnnConfig: point clouds carry 4 channels");
    require(batch_size >= 1 && epochs >= 1 && patience >= 1, "DgcnnConfig: bad training sizes");
    require(learning_rate > 0.0, "DgcnnConfig: learning rate must be positive");
}

namespace {

ad::DenseArray he_uniform(ad::Shape shape, Index fan_in, Rng& rng) {
    ad::DenseArray a(std::move(shape));
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (Index i = 0; i < a.size(); ++i) a.flat()[i] = rng.uniform(-limit, limit);
    return a;
}

struct LayerPlan {
    std::vector<std::pair<Index, Index>> edge;  // (in, out) per EdgeConv
    Index concat_width = 0;
    std::vector<std::pair<Index, Index>> head;  // aggregation linear, then head linears
};

LayerPlan plan(const DgcnnConfig& cfg) {
    LayerPlan lp;
    Index in = cfg.input_channels;
    for (Index out : cfg.edge_channels) {
        lp.edge.emplace_back(in, out);
        lp.concat_width += out;
        in = out;
    }
    Index width = lp.concat_width;
    lp.head.emplace_back(width, cfg.aggregation_width);
    width = cfg.aggregation_width;
    for (Index out : cfg.head_widths) {
        lp.head.emplace_back(width, out);
        width = out;
    }
    return lp;
}

std::string edge_w(std::size_t i) { return "edge" + std::to_string(i) + ".w"; }
std::string edge_b(std::size_t i) { return "edge" + std::to_string(i) + ".b"; }
std::string head_w(std::size_t i) { return i == 0 ? "agg.w" : "head" + std::to_string(i - 1) + ".w"; }
std::string head_b(std::size_t i) { return i == 0 ? "agg.b" : "head" + std::to_string(i - 1) + ".b"; }

struct BuiltGraph {
    ad::Graph graph;
    int logits = -1;
    int pool = -1;  // global max_rows node; its argmax rows are the critical candidates
};

// EdgeConv stack -> per-point stage concat -> shared MLP to the
// aggregation width -> global channelwise max -> head MLP. Weights enter
// the graph as named inputs so one build serves inference and training.
BuiltGraph build_graph(const geom::OnhPointCloud& cloud, const DgcnnModel& model) {
    const DgcnnConfig& cfg = model.config;
    require(cloud.canonical, "dgcnn forward: cloud is not canonical");
    const Index n = cloud.size();
    require(n > cfg.k, "dgcnn forward: cloud must have more than k points");

    BuiltGraph bg;
    ad::Graph& g = bg.graph;

    std::map<std::string, int> weight_node;
    for (const std::string& name : model.params.names()) {
        weight_node[name] = g.input(name, model.params.at(name).shape());
        g.bind(name, model.params.at(name));
    }

    ad::DenseArray feats(ad::Shape{n, cfg.input_channels});
    feats.mat().leftCols(3) = cloud.positions;
    feats.mat().col(3) = cloud.thickness;
    int current = g.constant(std::move(feats));

    const LayerPlan lp = plan(cfg);
    std::vector<int> stage_outputs;
    for (std::size_t layer = 0; layer < lp.edge.size(); ++layer) {
        geom::FeatureMatrix metric;
        if (layer == 0 && !cfg.thickness_in_first_metric)
            metric = cloud.positions;
        else
            metric = g.value(current).mat();
        const auto nbr = geom::knn_graph(metric, cfg.k);
        std::vector<Index> center_rows(static_cast<std::size_t>(n * cfg.k));
        std::vector<Index> neighbor_rows(static_cast<std::size_t>(n * cfg.k));
        for (Index i = 0; i < n; ++i)
            for (Index c = 0; c < cfg.k; ++c) {
                center_rows[static_cast<std::size_t>(i * cfg.k + c)] = i;
                neighbor_rows[static_cast<std::size_t>(i * cfg.k + c)] = nbr(i, c);
            }
        const int xi = g.gather_rows(current, std::move(center_rows));
        const int xj = g.gather_rows(current, std::move(neighbor_rows));
        const int edge = g.concat_cols({xi, g.sub(xj, xi)});
        const int lin = g.add_rowvec(g.matmul(edge, weight_node.at(edge_w(layer))),
                                     weight_node.at(edge_b(layer)));
        const int act = g.leaky_relu(lin, cfg.leaky_slope);
        current = g.max_pool_groups(act, cfg.k);
        stage_outputs.push_back(current);
    }

    int features = stage_outputs.size() == 1 ? stage_outputs[0] : g.concat_cols(stage_outputs);
    const int agg_lin = g.add_rowvec(g.matmul(features, weight_node.at(head_w(0))),
                                     weight_node.at(head_b(0)));
    const int agg = g.leaky_relu(agg_lin, cfg.leaky_slope);
    bg.pool = g.max_rows(agg);

    int x = bg.pool;
    for (std::size_t i = 1; i < lp.head.size(); ++i) {
        x = g.add_rowvec(g.matmul(x, weight_node.at(head_w(i))), weight_node.at(head_b(i)));
        if (i + 1 < lp.head.size()) x = g.leaky_relu(x, cfg.leaky_slope);
    }
    bg.logits = x;
    return bg;
}

CriticalPointSet critical_from(const ad::Graph& g, int pool_node) {
    CriticalPointSet set;
    set.channel_argmax = g.argmax_rows(pool_node);
    std::vector<Index> sorted = set.channel_argmax;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    set.indices = std::move(sorted);
    return set;
}

}  // namespace

ForwardResult forward(const geom::OnhPointCloud& cloud, const DgcnnModel& model) {
    BuiltGraph bg = build_graph(cloud, model);
    const ad::DenseArray& logits = bg.graph.value(bg.logits);
    ForwardResult res;
    res.logits = Eigen::Vector2d(logits.mat()(0, 0), logits.mat()(0, 1));
    res.critical = critical_from(bg.graph, bg.pool);
    return res;
}

double predict_proba(const geom::OnhPointCloud& cloud, const DgcnnModel& model) {
    const ForwardResult res = forward(cloud, model);
    const double m = res.logits.maxCoeff();
    const double e0 = std::exp(res.logits[0] - m);
    const double e1 = std::exp(res.logits[1] - m);
    return e1 / (e0 + e1);
}

LossEval loss_and_gradients(const geom::OnhPointCloud& cloud, int label, const DgcnnModel& model) {
    require(label == 0 || label == 1, "dgcnn loss: label must be 0 or 1");
    BuiltGraph bg = build_graph(cloud, model);
    const int loss = bg.graph.softmax_cross_entropy(bg.logits, {label});
    auto eval = bg.graph.evaluate_with_gradients(loss);
    LossEval out;
    out.loss = eval.value.scalar_value();
    out.grads = std::move(eval.gradients);
    return out;
}

double loss_only(const geom::OnhPointCloud& cloud, int label, const DgcnnModel& model) {
    require(label == 0 || label == 1, "dgcnn loss: label must be 0 or 1");
    BuiltGraph bg = build_graph(cloud, model);
    const int loss = bg.graph.softmax_cross_entropy(bg.logits, {label});
    return bg.graph.value(loss).scalar_value();
}

namespace {

geom::OnhPointCloud subsample_cloud(const geom::OnhPointCloud& cloud, Index count,
                                    std::uint64_t seed) {
    if (count <= 0 || count >= cloud.size()) return cloud;
    geom::AugmentationConfig cfg;
    cfg.enable_subsample = true;
    cfg.subsample_count = count;
    cfg.seed = seed;
    return geom::augment(cloud, cfg);
}

}  // namespace

TrainResult train(const std::vector<LabeledCloud>& train_set,
                  const std::vector<LabeledCloud>& val_set, const DgcnnConfig& cfg, int jobs) {
    cfg.validate();
    require(!train_set.empty() && !val_set.empty(), "dgcnn train: empty train or validation set");
    for (const auto& s : train_set)
        require(s.cloud.canonical, "dgcnn train: non-canonical training cloud " + s.id);
    for (const auto& s : val_set)
        require(s.cloud.canonical, "dgcnn train: non-canonical validation cloud " + s.id);

    DgcnnModel model = init_model(cfg);
    {
        std::string ids;
        for (const auto& s : train_set) ids += s.id + "\n";
        for (const auto& s : val_set) ids += s.id + "|\n";
        model.manifest.data_hash = fnv1a_hex(ids);
    }

    std::map<std::string, ad::AdamState> adam;
    for (const std::string& name : model.params.names())
        adam[name] = ad::AdamState::for_param(model.params.at(name));
    ad::AdamConfig adam_cfg;
    adam_cfg.lr = cfg.learning_rate;

    Rng rng(cfg.seed ^ 0x5eedull);

    // validation clouds are fixed once so the early-stopping signal is
    // comparable across epochs
    std::vector<geom::OnhPointCloud> val_clouds(val_set.size());
    for (std::size_t i = 0; i < val_set.size(); ++i)
        val_clouds[i] = subsample_cloud(val_set[i].cloud, cfg.val_subsample,
                                        rng.fork(0xa100 + i).next());

    auto mean_val_loss = [&](const DgcnnModel& m) {
        std::vector<double> losses(val_set.size());
        parallel_for(val_set.size(), jobs, [&](std::size_t i) {
            losses[i] = loss_only(val_clouds[i], val_set[i].label, m);
        });
        double total = 0.0;
        for (double l : losses) total += l;
        return total / static_cast<double>(losses.size());
    };

    TrainResult result;
    ad::ParamStore best_params = model.params;
    double best_val = std::numeric_limits<double>::infinity();
    Index best_epoch = -1;
    Index stale = 0;

    const std::size_t n_train = train_set.size();
    for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng epoch_rng = rng.fork(static_cast<std::uint64_t>(epoch) + 1);
        const std::vector<std::size_t> order = epoch_rng.permutation(n_train);

        double train_loss_sum = 0.0;
        for (std::size_t start = 0; start < n_train; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(n_train, start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<LossEval> evals(stop - start);
            parallel_for(stop - start, jobs, [&](std::size_t b) {
                const LabeledCloud& sample = train_set[order[start + b]];
                geom::OnhPointCloud cloud = sample.cloud;
                if (cfg.augment_enabled) {
                    geom::AugmentationConfig aug = cfg.augment;
                    aug.seed = epoch_rng.fork(order[start + b]).next();
                    cloud = geom::augment(cloud, aug);
                }
                evals[b] = loss_and_gradients(cloud, sample.label, model);
            });
            // fixed-order reduction keeps training independent of `jobs`
            std::map<std::string, ad::DenseArray> acc;
            for (std::size_t b = 0; b < evals.size(); ++b) {
                if (!std::isfinite(evals[b].loss))
                    fail("dgcnn train: non-finite loss at epoch " + std::to_string(epoch));
                train_loss_sum += evals[b].loss;
                for (auto& [name, grad] : evals[b].grads) {
                    auto it = acc.find(name);
                    if (it == acc.end())
                        acc.emplace(name, std::move(grad));
                    else
                        it->second.flat() += grad.flat();
                }
            }
            const double inv = 1.0 / static_cast<double>(evals.size());
            for (const std::string& name : model.params.names()) {
                auto it = acc.find(name);
                require(it != acc.end(), "dgcnn train: missing gradient for " + name);
                it->second.flat() *= inv;
                ad::adam_step(model.params.at(name), it->second, adam.at(name), adam_cfg, name);
            }
        }

        EpochStats stats;
        stats.train_loss = train_loss_sum / static_cast<double>(n_train);
        stats.val_loss = mean_val_loss(model);
        result.history.push_back(stats);
        if (!std::isfinite(stats.val_loss))
            fail("dgcnn train: non-finite validation loss at epoch " + std::to_string(epoch));

        if (stats.val_loss < best_val - 1e-12) {
            best_val = stats.val_loss;
            best_epoch = epoch;
            best_params = model.params;
            stale = 0;
        } else if (++stale >= cfg.patience) {
            break;
        }
    }

    model.params = std::move(best_params);
    model.manifest.best_epoch = best_epoch;
    model.manifest.epochs_run = static_cast<Index>(result.history.size());
    result.model = std::move(model);
    return result;
}

PooledCriticalPoints pool_critical_points(const std::vector<const geom::OnhPointCloud*>& clouds,
                                          const std::vector<CriticalPointSet>& sets) {
    require(clouds.size() == sets.size(), "pool_critical_points: clouds and sets differ in count");
    Index total = 0;
    for (const auto& s : sets) total += static_cast<Index>(s.indices.size());
    PooledCriticalPoints pooled;
    pooled.positions.resize(total, 3);
    pooled.source.reserve(static_cast<std::size_t>(total));
    Index row = 0;
    for (std::size_t c = 0; c < clouds.size(); ++c) {
        for (Index idx : sets[c].indices) {
            require(idx >= 0 && idx < clouds[c]->size(),
                    "pool_critical_points: critical index out of range");
            pooled.positions.row(row++) = clouds[c]->positions.row(idx);
            pooled.source.push_back(static_cast<int>(c));
        }
    }
    return pooled;
}

Eigen::VectorXi critical_density_counts(const geom::Points& pooled, double radius_mm) {
    const Index n = pooled.rows();
    require(n > 0, "critical_density_counts: empty pooled set");
    const double r2 = radius_mm * radius_mm;
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(n);
    for (Index i = 0; i < n; ++i) {
        int c = 0;
        for (Index j = 0; j < n; ++j) {
            if (j == i) continue;
            if (geom::squared_distance(pooled.row(i).data(), pooled.row(j).data(), 3) <= r2) ++c;
        }
        counts[i] = c;
    }
    return counts;
}

void write_critical_csv(const std::string& path, const geom::Points& pooled,
                        const Eigen::VectorXi& counts) {
    require(pooled.rows() == counts.size(), "write_critical_csv: size mismatch");
    std::string s = "x_mm,y_mm,z_mm,count\n";
    char buf[128];
    for (Index i = 0; i < pooled.rows(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%d\n", pooled(i, 0), pooled(i, 1),
                      pooled(i, 2), counts[i]);
        s += buf;
    }
    write_file(path, s);
}

void write_critical_ply(const std::string& path, const geom::Points& pooled,
                        const Eigen::VectorXi& counts) {
    require(pooled.rows() == counts.size(), "write_critical_ply: size mismatch");
    std::ostringstream os;
    os << "ply\nformat ascii 1.0\nelement vertex " << pooled.rows()
       << "\nproperty double x\nproperty double y\nproperty double z\n"
          "property int count\nend_header\n";
    char buf[128];
    for (Index i = 0; i < pooled.rows(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %d\n", pooled(i, 0), pooled(i, 1),
                      pooled(i, 2), counts[i]);
        os << buf;
    }
    write_file(path, os.str());
}

namespace {

nlohmann::ordered_json config_to_json(const DgcnnConfig& cfg) {
    nlohmann::ordered_json j;
    j["k"] = cfg.k;
    j["edge_channels"] = cfg.edge_channels;
    j["aggregation_width"] = cfg.aggregation_width;
    j["head_widths"] = cfg.head_widths;
    j["leaky_slope"] = cfg.leaky_slope;
    j["input_channels"] = cfg.input_channels;
    j["thickness_in_first_metric"] = cfg.thickness_in_first_metric;
    j["batch_size"] = cfg.batch_size;
    j["epochs"] = cfg.epochs;
    j["patience"] = cfg.patience;
    j["learning_rate"] = cfg.learning_rate;
    j["seed"] = cfg.seed;
    j["val_subsample"] = cfg.val_subsample;
    return j;
}

DgcnnConfig config_from_json(const nlohmann::json& j) {
    DgcnnConfig cfg;
    cfg.k = j.at("k").get<Index>();
    cfg.edge_channels = j.at("edge_channels").get<std::vector<Index>>();
    cfg.aggregation_width = j.at("aggregation_width").get<Index>();
    cfg.head_widths = j.at("head_widths").get<std::vector<Index>>();
    cfg.leaky_slope = j.at("leaky_slope").get<double>();
    cfg.input_channels = j.at("input_channels").get<Index>();
    cfg.thickness_in_first_metric = j.at("thickness_in_first_metric").get<bool>();
    cfg.batch_size = j.at("batch_size").get<Index>();
    cfg.epochs = j.at("epochs").get<Index>();
    cfg.patience = j.at("patience").get<Index>();
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.val_subsample = j.at("val_subsample").get<Index>();
    return cfg;
}

}  // namespace

void save_model(const std::string& prefix, const DgcnnModel& model, const std::string& config_hash) {
    ad::save_weights(prefix + ".weights", model.params, model.manifest.seed, config_hash);
    nlohmann::ordered_json j;
    j["config"] = config_to_json(model.config);
    j["manifest"] = {{"seed", model.manifest.seed},
                     {"data_hash", model.manifest.data_hash},
                     {"best_epoch", model.manifest.best_epoch},
                     {"epochs_run", model.manifest.epochs_run}};
    write_file(prefix + ".model.json", j.dump(2) + "\n");
}

DgcnnModel load_model(const std::string& prefix) {
    const auto j = nlohmann::json::parse(read_file(prefix + ".model.json"));
    DgcnnModel model;
    model.config = config_from_json(j.at("config"));
    model.params = ad::load_weights(prefix + ".weights");
    model.manifest.seed = j.at("manifest").at("seed").get<std::uint64_t>();
    model.manifest.data_hash = j.at("manifest").at("data_hash").get<std::string>();
    model.manifest.best_epoch = j.at("manifest").at("best_epoch").get<Index>();
    model.manifest.epochs_run = j.at("manifest").at("epochs_run").get<Index>();
    return model;
}

}  // namespace onh::dgcnn
