#include "onh/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace onh::ad {

Index shape_size(const Shape& s) {
    Index n = 1;
    for (Index d : s) n *= d;
    return s.empty() ? 0 : n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << "]";
    return os.str();
}

DenseArray::DenseArray(Shape shape) : shape_(std::move(shape)) {
    require(!shape_.empty(), "DenseArray: empty shape");
    for (Index d : shape_) require(d > 0, "DenseArray: non-positive dimension in " + shape_str(shape_));
    data_ = Eigen::VectorXd::Zero(shape_size(shape_));
}

DenseArray::DenseArray(Shape shape, std::vector<double> values) : DenseArray(std::move(shape)) {
    require(static_cast<Index>(values.size()) == data_.size(),
            "DenseArray: value count does not match shape " + shape_str(shape_));
    std::copy(values.begin(), values.end(), data_.data());
}

DenseArray DenseArray::scalar(double v) {
    DenseArray a(Shape{1});
    a.data_[0] = v;
    return a;
}

DenseArray DenseArray::full(Shape shape, double v) {
    DenseArray a(std::move(shape));
    a.data_.setConstant(v);
    return a;
}

DenseArray DenseArray::from_matrix(const RowMat& m) {
    DenseArray a(Shape{m.rows(), m.cols()});
    a.mat() = m;
    return a;
}

double DenseArray::scalar_value() const {
    require(is_scalar(), "DenseArray: scalar_value on array of shape " + shape_str(shape_));
    return data_[0];
}

Index DenseArray::rows() const { return rank() == 2 ? shape_[0] : 1; }
Index DenseArray::cols() const { return rank() == 2 ? shape_[1] : size(); }

Eigen::Map<RowMat> DenseArray::mat() { return {data_.data(), rows(), cols()}; }
Eigen::Map<const RowMat> DenseArray::mat() const { return {data_.data(), rows(), cols()}; }

bool DenseArray::all_finite() const {
    return data_.allFinite();
}

const char* op_name(Op op) {
    switch (op) {
        case Op::Input: return "input";
        case Op::Const: return "const";
        case Op::Add: return "add";
        case Op::AddRowVec: return "add_rowvec";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::MatMul: return "matmul";
        case Op::Scale: return "scale";
        case Op::LeakyRelu: return "leaky_relu";
        case Op::GatherRows: return "gather_rows";
        case Op::ConcatCols: return "concat_cols";
        case Op::MaxRows: return "max_rows";
        case Op::MaxPoolGroups: return "max_pool_groups";
        case Op::Sum: return "sum";
        case Op::SoftmaxCrossEntropy: return "softmax_cross_entropy";
        case Op::Reshape: return "reshape";
    }
    return "?";
}

void Graph::node_fail(const Node& n, const std::string& msg) const {
    std::ostringstream os;
    os << "graph node " << op_name(n.op);
    if (!n.name.empty()) os << " '" << n.name << "'";
    os << ": " << msg;
    fail(os.str());
}

int Graph::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

const Graph::Node& Graph::checked(int id, const char* ctx) const {
    require(id >= 0 && id < static_cast<int>(nodes_.size()),
            std::string(ctx) + ": node id out of range");
    return nodes_[static_cast<std::size_t>(id)];
}

int Graph::input(const std::string& name, Shape shape) {
    require(!name.empty(), "input: name required");
    for (const Node& n : nodes_)
        require(!(n.op == Op::Input && n.name == name), "input: duplicate name '" + name + "'");
    Node n;
    n.op = Op::Input;
    n.name = name;
    n.shape = std::move(shape);
    return push(std::move(n));
}

int Graph::constant(DenseArray value) {
    Node n;
    n.op = Op::Const;
    n.shape = value.shape();
    n.value = std::move(value);
    return push(std::move(n));
}

int Graph::add(int a, int b) {
    const auto& na = checked(a, "add");
    const auto& nb = checked(b, "add");
    Node n{Op::Add, "", {a, b}, na.shape};
    if (na.shape != nb.shape)
        node_fail(n, "shape mismatch " + shape_str(na.shape) + " vs " + shape_str(nb.shape));
    return push(std::move(n));
}

int Graph::add_rowvec(int a, int bias) {
    const auto& na = checked(a, "add_rowvec");
    const auto& nb = checked(bias, "add_rowvec");
    Node n{Op::AddRowVec, "", {a, bias}, na.shape};
    const Index cols = na.shape.size() == 2 ? na.shape[1] : shape_size(na.shape);
    if (shape_size(nb.shape) != cols)
        node_fail(n, "bias size " + shape_str(nb.shape) + " does not match columns of " + shape_str(na.shape));
    return push(std::move(n));
}

int Graph::sub(int a, int b) {
    const auto& na = checked(a, "sub");
    const auto& nb = checked(b, "sub");
    Node n{Op::Sub, "", {a, b}, na.shape};
    if (na.shape != nb.shape)
        node_fail(n, "shape mismatch " + shape_str(na.shape) + " vs " + shape_str(nb.shape));
    return push(std::move(n));
}

int Graph::mul(int a, int b) {
    const auto& na = checked(a, "mul");
    const auto& nb = checked(b, "mul");
    Node n{Op::Mul, "", {a, b}, na.shape};
    if (na.shape != nb.shape)
        node_fail(n, "shape mismatch " + shape_str(na.shape) + " vs " + shape_str(nb.shape));
    return push(std::move(n));
}

int Graph::matmul(int a, int b) {
    const auto& na = checked(a, "matmul");
    const auto& nb = checked(b, "matmul");
    Node n{Op::MatMul, "", {a, b}, {}};
    if (na.shape.size() != 2 || nb.shape.size() != 2)
        node_fail(n, "operands must be rank 2, got " + shape_str(na.shape) + " and " + shape_str(nb.shape));
    if (na.shape[1] != nb.shape[0])
        node_fail(n, "inner dimensions differ: " + shape_str(na.shape) + " x " + shape_str(nb.shape));
    n.shape = {na.shape[0], nb.shape[1]};
    return push(std::move(n));
}

int Graph::scale(int a, double factor) {
    const auto& na = checked(a, "scale");
    Node n{Op::Scale, "", {a}, na.shape};
    n.fattr = factor;
    return push(std::move(n));
}

int Graph::leaky_relu(int a, double slope) {
    const auto& na = checked(a, "leaky_relu");
    Node n{Op::LeakyRelu, "", {a}, na.shape};
    if (!(slope >= 0.0 && slope < 1.0)) node_fail(n, "slope must lie in [0,1)");
    n.fattr = slope;
    return push(std::move(n));
}

int Graph::gather_rows(int a, std::vector<Index> rows) {
    const auto& na = checked(a, "gather_rows");
    Node n{Op::GatherRows, "", {a}, {}};
    if (na.shape.size() != 2) node_fail(n, "operand must be rank 2");
    if (rows.empty()) node_fail(n, "empty row list");
    for (Index r : rows)
        if (r < 0 || r >= na.shape[0]) node_fail(n, "row index out of range");
    n.shape = {static_cast<Index>(rows.size()), na.shape[1]};
    n.iattrs = std::move(rows);
    return push(std::move(n));
}

int Graph::concat_cols(const std::vector<int>& parts) {
    Node n{Op::ConcatCols, "", parts, {}};
    if (parts.empty()) node_fail(n, "no operands");
    Index rows = -1, cols = 0;
    for (int p : parts) {
        const auto& np = checked(p, "concat_cols");
        if (np.shape.size() != 2) node_fail(n, "operands must be rank 2");
        if (rows < 0) rows = np.shape[0];
        if (np.shape[0] != rows) node_fail(n, "row counts differ");
        cols += np.shape[1];
    }
    n.shape = {rows, cols};
    return push(std::move(n));
}

int Graph::max_rows(int a) {
    const auto& na = checked(a, "max_rows");
    Node n{Op::MaxRows, "", {a}, {}};
    if (na.shape.size() != 2) node_fail(n, "operand must be rank 2");
    n.shape = {Index{1}, na.shape[1]};
    return push(std::move(n));
}

int Graph::max_pool_groups(int a, Index group_size) {
    const auto& na = checked(a, "max_pool_groups");
    Node n{Op::MaxPoolGroups, "", {a}, {}};
    if (na.shape.size() != 2) node_fail(n, "operand must be rank 2");
    if (group_size <= 0 || na.shape[0] % group_size != 0)
        node_fail(n, "rows not divisible by group size");
    n.shape = {na.shape[0] / group_size, na.shape[1]};
    n.iattrs = {group_size};
    return push(std::move(n));
}

int Graph::sum(int a) {
    checked(a, "sum");
    Node n{Op::Sum, "", {a}, Shape{1}};
    return push(std::move(n));
}

int Graph::softmax_cross_entropy(int logits, std::vector<Index> targets) {
    const auto& nl = checked(logits, "softmax_cross_entropy");
    Node n{Op::SoftmaxCrossEntropy, "", {logits}, Shape{1}};
    if (nl.shape.size() != 2) node_fail(n, "logits must be rank 2");
    const Index classes = nl.shape[1];
    if (classes < 2) node_fail(n, "need at least 2 classes");
    if (static_cast<Index>(targets.size()) != nl.shape[0])
        node_fail(n, "target count does not match logit rows");
    for (Index t : targets)
        if (t < 0 || t >= classes) node_fail(n, "class index out of range");
    n.iattrs = std::move(targets);
    return push(std::move(n));
}

int Graph::reshape(int a, Shape shape) {
    const auto& na = checked(a, "reshape");
    Node n{Op::Reshape, "", {a}, shape};
    if (shape_size(shape) != shape_size(na.shape))
        node_fail(n, "cannot reshape " + shape_str(na.shape) + " to " + shape_str(shape));
    return push(std::move(n));
}

void Graph::bind(const std::string& name, DenseArray value) {
    bindings_[name] = std::move(value);
    computed_ = 0;
}

void Graph::forward_node(Node& n) {
    auto val = [&](int id) -> const DenseArray& { return nodes_[static_cast<std::size_t>(id)].value; };
    switch (n.op) {
        case Op::Input: {
            auto it = bindings_.find(n.name);
            if (it == bindings_.end()) node_fail(n, "unbound input");
            if (it->second.shape() != n.shape)
                node_fail(n, "bound value has shape " + shape_str(it->second.shape()) +
                                 ", declared " + shape_str(n.shape));
            n.value = it->second;
            break;
        }
        case Op::Const:
            break;
        case Op::Add: {
            n.value = DenseArray(n.shape);
            n.value.flat() = val(n.args[0]).flat() + val(n.args[1]).flat();
            break;
        }
        case Op::AddRowVec: {
            n.value = DenseArray(n.shape);
            const auto& b = val(n.args[1]);
            Eigen::Map<const Eigen::RowVectorXd> bias(b.flat().data(), b.size());
            n.value.mat() = val(n.args[0]).mat().rowwise() + bias;
            break;
        }
        case Op::Sub: {
            n.value = DenseArray(n.shape);
            n.value.flat() = val(n.args[0]).flat() - val(n.args[1]).flat();
            break;
        }
        case Op::Mul: {
            n.value = DenseArray(n.shape);
            n.value.flat() = val(n.args[0]).flat() * val(n.args[1]).flat();
            break;
        }
        case Op::MatMul: {
            n.value = DenseArray(n.shape);
            n.value.mat() = val(n.args[0]).mat() * val(n.args[1]).mat();
            break;
        }
        case Op::Scale: {
            n.value = DenseArray(n.shape);
            n.value.flat() = val(n.args[0]).flat() * n.fattr;
            break;
        }
        case Op::LeakyRelu: {
            n.value = DenseArray(n.shape);
            const double s = n.fattr;
            n.value.flat() = val(n.args[0]).flat().unaryExpr(
                [s](double x) { return x >= 0.0 ? x : s * x; });
            break;
        }
        case Op::GatherRows: {
            n.value = DenseArray(n.shape);
            auto src = val(n.args[0]).mat();
            auto dst = n.value.mat();
            for (Index r = 0; r < n.shape[0]; ++r) dst.row(r) = src.row(n.iattrs[static_cast<std::size_t>(r)]);
            break;
        }
        case Op::ConcatCols: {
            n.value = DenseArray(n.shape);
            auto dst = n.value.mat();
            Index off = 0;
            for (int p : n.args) {
                auto part = val(p).mat();
                dst.middleCols(off, part.cols()) = part;
                off += part.cols();
            }
            break;
        }
        case Op::MaxRows: {
            n.value = DenseArray(n.shape);
            auto src = val(n.args[0]).mat();
            auto dst = n.value.mat();
            n.argmax.assign(static_cast<std::size_t>(src.cols()), 0);
            for (Index c = 0; c < src.cols(); ++c) {
                Index best = 0;
                double bv = src(0, c);
                for (Index r = 1; r < src.rows(); ++r)
                    if (src(r, c) > bv) { bv = src(r, c); best = r; }  // ties keep lowest row
                dst(0, c) = bv;
                n.argmax[static_cast<std::size_t>(c)] = best;
            }
            break;
        }
        case Op::MaxPoolGroups: {
            n.value = DenseArray(n.shape);
            auto src = val(n.args[0]).mat();
            auto dst = n.value.mat();
            const Index k = n.iattrs[0];
            n.argmax.assign(static_cast<std::size_t>(n.shape[0] * n.shape[1]), 0);
            for (Index g = 0; g < n.shape[0]; ++g) {
                for (Index c = 0; c < n.shape[1]; ++c) {
                    Index best = g * k;
                    double bv = src(best, c);
                    for (Index r = g * k + 1; r < (g + 1) * k; ++r)
                        if (src(r, c) > bv) { bv = src(r, c); best = r; }
                    dst(g, c) = bv;
                    n.argmax[static_cast<std::size_t>(g * n.shape[1] + c)] = best;
                }
            }
            break;
        }
        case Op::Sum: {
            n.value = DenseArray::scalar(val(n.args[0]).flat().sum());
            break;
        }
        case Op::SoftmaxCrossEntropy: {
            auto logits = val(n.args[0]).mat();
            const Index rows = logits.rows();
            double total = 0.0;
            for (Index r = 0; r < rows; ++r) {
                const double m = logits.row(r).maxCoeff();
                const double lse = m + std::log((logits.row(r).array() - m).exp().sum());
                total += lse - logits(r, n.iattrs[static_cast<std::size_t>(r)]);
            }
            n.value = DenseArray::scalar(total / static_cast<double>(rows));
            break;
        }
        case Op::Reshape: {
            n.value = DenseArray(n.shape);
            n.value.flat() = val(n.args[0]).flat();
            break;
        }
    }
}

const DenseArray& Graph::value(int id) {
    checked(id, "value");
    for (; computed_ <= id; ++computed_) forward_node(nodes_[static_cast<std::size_t>(computed_)]);
    return nodes_[static_cast<std::size_t>(id)].value;
}

const std::vector<Index>& Graph::argmax_rows(int id) const {
    const Node& n = checked(id, "argmax_rows");
    require(n.op == Op::MaxRows || n.op == Op::MaxPoolGroups,
            "argmax_rows: node is not a max reduction");
    require(computed_ > id, "argmax_rows: node has not been evaluated");
    return n.argmax;
}

Graph::EvalResult Graph::evaluate_with_gradients(int out,
                                                 const std::map<std::string, DenseArray>& inputs) {
    for (const auto& [name, v] : inputs) bind(name, v);
    return evaluate_with_gradients(out);
}

Graph::EvalResult Graph::evaluate_with_gradients(int out) {
    const Node& on = checked(out, "evaluate_with_gradients");
    value(out);
    if (!on.value.is_scalar())
        node_fail(on, "gradients require a scalar output, got shape " + shape_str(on.shape));

    std::vector<DenseArray> grads(static_cast<std::size_t>(out) + 1);
    std::vector<bool> has_grad(static_cast<std::size_t>(out) + 1, false);
    auto grad_of = [&](int id) -> DenseArray& {
        auto i = static_cast<std::size_t>(id);
        if (!has_grad[i]) {
            grads[i] = DenseArray(nodes_[i].shape);
            has_grad[i] = true;
        }
        return grads[i];
    };
    grad_of(out).flat().setConstant(1.0);

    for (int id = out; id >= 0; --id) {
        const auto i = static_cast<std::size_t>(id);
        if (!has_grad[i]) continue;
        const Node& n = nodes_[i];
        const DenseArray& g = grads[i];
        switch (n.op) {
            case Op::Input:
            case Op::Const:
                break;
            case Op::Add:
                grad_of(n.args[0]).flat() += g.flat();
                grad_of(n.args[1]).flat() += g.flat();
                break;
            case Op::AddRowVec: {
                grad_of(n.args[0]).flat() += g.flat();
                DenseArray& gb = grad_of(n.args[1]);
                Eigen::Map<Eigen::RowVectorXd> bias(gb.flat().data(), gb.size());
                bias += g.mat().colwise().sum();
                break;
            }
            case Op::Sub:
                grad_of(n.args[0]).flat() += g.flat();
                grad_of(n.args[1]).flat() -= g.flat();
                break;
            case Op::Mul:
                grad_of(n.args[0]).flat() += g.flat() * nodes_[static_cast<std::size_t>(n.args[1])].value.flat();
                grad_of(n.args[1]).flat() += g.flat() * nodes_[static_cast<std::size_t>(n.args[0])].value.flat();
                break;
            case Op::MatMul: {
                const auto& a = nodes_[static_cast<std::size_t>(n.args[0])].value;
                const auto& b = nodes_[static_cast<std::size_t>(n.args[1])].value;
                grad_of(n.args[0]).mat() += g.mat() * b.mat().transpose();
                grad_of(n.args[1]).mat() += a.mat().transpose() * g.mat();
                break;
            }
            case Op::Scale:
                grad_of(n.args[0]).flat() += g.flat() * n.fattr;
                break;
            case Op::LeakyRelu: {
                const double s = n.fattr;
                const auto& x = nodes_[static_cast<std::size_t>(n.args[0])].value;
                grad_of(n.args[0]).flat() +=
                    g.flat() * x.flat().unaryExpr([s](double v) { return v >= 0.0 ? 1.0 : s; });
                break;
            }
            case Op::GatherRows: {
                auto ga = grad_of(n.args[0]).mat();
                auto gm = g.mat();
                for (Index r = 0; r < n.shape[0]; ++r)
                    ga.row(n.iattrs[static_cast<std::size_t>(r)]) += gm.row(r);
                break;
            }
            case Op::ConcatCols: {
                Index off = 0;
                auto gm = g.mat();
                for (int p : n.args) {
                    auto gp = grad_of(p).mat();
                    gp += gm.middleCols(off, gp.cols());
                    off += gp.cols();
                }
                break;
            }
            case Op::MaxRows: {
                auto ga = grad_of(n.args[0]).mat();
                for (Index c = 0; c < n.shape[1]; ++c)
                    ga(n.argmax[static_cast<std::size_t>(c)], c) += g.mat()(0, c);
                break;
            }
            case Op::MaxPoolGroups: {
                auto ga = grad_of(n.args[0]).mat();
                for (Index gi = 0; gi < n.shape[0]; ++gi)
                    for (Index c = 0; c < n.shape[1]; ++c)
                        ga(n.argmax[static_cast<std::size_t>(gi * n.shape[1] + c)], c) += g.mat()(gi, c);
                break;
            }
            case Op::Sum:
                grad_of(n.args[0]).flat() += g.scalar_value();
                break;
            case Op::SoftmaxCrossEntropy: {
                auto logits = nodes_[static_cast<std::size_t>(n.args[0])].value.mat();
                auto gl = grad_of(n.args[0]).mat();
                const double gs = g.scalar_value() / static_cast<double>(logits.rows());
                for (Index r = 0; r < logits.rows(); ++r) {
                    const double m = logits.row(r).maxCoeff();
                    Eigen::RowVectorXd p = (logits.row(r).array() - m).exp();
                    p /= p.sum();
                    gl.row(r) += gs * p;
                    gl(r, n.iattrs[static_cast<std::size_t>(r)]) -= gs;
                }
                break;
            }
            case Op::Reshape:
                grad_of(n.args[0]).flat() += g.flat();
                break;
        }
    }

    EvalResult res;
    res.value = on.value;
    for (int id = 0; id <= out; ++id) {
        const auto i = static_cast<std::size_t>(id);
        if (nodes_[i].op != Op::Input) continue;
        if (has_grad[i])
            res.gradients[nodes_[i].name] = std::move(grads[i]);
        else
            res.gradients[nodes_[i].name] = DenseArray(nodes_[i].shape);
    }
    return res;
}

AdamState AdamState::for_param(const DenseArray& param) {
    AdamState s;
    s.m = DenseArray(param.shape());
    s.v = DenseArray(param.shape());
    return s;
}

void adam_step(DenseArray& param, const DenseArray& grad, AdamState& state,
               const AdamConfig& cfg, const std::string& param_name) {
    require(param.same_shape(grad), "adam_step: gradient shape mismatch for '" + param_name + "'");
    require(state.m.same_shape(param) && state.v.same_shape(param),
            "adam_step: state shape mismatch for '" + param_name + "'");
    if (!grad.all_finite())
        fail("adam_step: non-finite gradient entries for parameter '" + param_name + "'");
    state.t += 1;
    const double b1 = cfg.beta1, b2 = cfg.beta2;
    state.m.flat() = b1 * state.m.flat() + (1.0 - b1) * grad.flat();
    state.v.flat() = b2 * state.v.flat() + (1.0 - b2) * grad.flat().square();
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    param.flat() -= cfg.lr * (state.m.flat() / c1) / ((state.v.flat() / c2).sqrt() + cfg.eps);
}

void ParamStore::add(const std::string& name, DenseArray value) {
    require(!contains(name), "ParamStore: duplicate parameter '" + name + "'");
    order_.push_back(name);
    values_[name] = std::move(value);
}

DenseArray& ParamStore::at(const std::string& name) {
    auto it = values_.find(name);
    require(it != values_.end(), "ParamStore: unknown parameter '" + name + "'");
    return it->second;
}

const DenseArray& ParamStore::at(const std::string& name) const {
    auto it = values_.find(name);
    require(it != values_.end(), "ParamStore: unknown parameter '" + name + "'");
    return it->second;
}

bool ParamStore::contains(const std::string& name) const { return values_.count(name) > 0; }

void save_weights(const std::string& prefix, const ParamStore& params,
                  std::uint64_t seed, const std::string& config_hash) {
    std::string blob;
    nlohmann::ordered_json manifest;
    manifest["format"] = "onh-weights-v1";
    manifest["seed"] = seed;
    manifest["config_hash"] = config_hash;
    auto arrays = nlohmann::ordered_json::array();
    for (const std::string& name : params.names()) {
        const DenseArray& a = params.at(name);
        nlohmann::ordered_json entry;
        entry["name"] = name;
        entry["shape"] = a.shape();
        entry["offset"] = blob.size();
        arrays.push_back(entry);
        for (Index i = 0; i < a.size(); ++i) append_le_f64(blob, a.flat()[i]);
    }
    manifest["arrays"] = arrays;
    write_file(prefix + ".bin", blob);
    write_file(prefix + ".json", manifest.dump(2) + "\n");
}

ParamStore load_weights(const std::string& prefix, std::uint64_t* seed, std::string* config_hash) {
    const std::string blob = read_file(prefix + ".bin");
    const auto manifest = nlohmann::json::parse(read_file(prefix + ".json"));
    require(manifest.at("format") == "onh-weights-v1", "load_weights: unknown format in " + prefix + ".json");
    if (seed) *seed = manifest.at("seed").get<std::uint64_t>();
    if (config_hash) *config_hash = manifest.at("config_hash").get<std::string>();
    ParamStore store;
    for (const auto& entry : manifest.at("arrays")) {
        Shape shape = entry.at("shape").get<Shape>();
        DenseArray a(shape);
        const std::size_t offset = entry.at("offset").get<std::size_t>();
        require(offset + 8 * static_cast<std::size_t>(a.size()) <= blob.size(),
                "load_weights: blob too short for '" + entry.at("name").get<std::string>() + "'");
        const auto* p = reinterpret_cast<const unsigned char*>(blob.data()) + offset;
        for (Index i = 0; i < a.size(); ++i) a.flat()[i] = read_le_f64(p + 8 * i);
        store.add(entry.at("name").get<std::string>(), std::move(a));
    }
    return store;
}

}  // namespace onh::ad
