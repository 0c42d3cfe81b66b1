#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "onh/core.hpp"

namespace onh::ad {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;
using Shape = std::vector<Index>;

Index shape_size(const Shape& s);
std::string shape_str(const Shape& s);

/// Dense 64-bit float array, row-major. Rank is 1 or 2 in practice; a
/// scalar is any array of total size 1.
class DenseArray {
public:
    DenseArray() = default;
    explicit DenseArray(Shape shape);  // zero-filled
    DenseArray(Shape shape, std::vector<double> values);

    static DenseArray scalar(double v);
    static DenseArray full(Shape shape, double v);
    static DenseArray from_matrix(const RowMat& m);

    const Shape& shape() const { return shape_; }
    Index rank() const { return static_cast<Index>(shape_.size()); }
    Index size() const { return data_.size(); }
    bool is_scalar() const { return size() == 1; }
    double scalar_value() const;

    /// Rank-2 view; a rank-1 array maps to a single row.
    Eigen::Map<RowMat> mat();
    Eigen::Map<const RowMat> mat() const;
    Eigen::Map<Eigen::ArrayXd> flat() { return {data_.data(), data_.size()}; }
    Eigen::Map<const Eigen::ArrayXd> flat() const { return {data_.data(), data_.size()}; }

    Index rows() const;
    Index cols() const;

    bool same_shape(const DenseArray& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

private:
    Shape shape_;
    Eigen::VectorXd data_;
};

enum class Op {
    Input,
    Const,
    Add,
    AddRowVec,
    Sub,
    Mul,
    MatMul,
    Scale,
    LeakyRelu,
    GatherRows,
    ConcatCols,
    MaxRows,
    MaxPoolGroups,
    Sum,
    SoftmaxCrossEntropy,
    Reshape,
};

const char* op_name(Op op);

/// Reverse-mode compute graph over DenseArrays.
///
/// Nodes are appended in topological order by construction. Values are
/// computed lazily and cached; rebinding an input invalidates the cache.
/// value() may be called while the graph is still being built, which is
/// what lets EdgeConv recompute k-NN graphs in feature space mid-forward.
class Graph {
public:
    int input(const std::string& name, Shape shape);
    int constant(DenseArray value);

    int add(int a, int b);
    int add_rowvec(int a, int bias);
    int sub(int a, int b);
    int mul(int a, int b);
    int matmul(int a, int b);
    int scale(int a, double factor);
    int leaky_relu(int a, double slope);
    int gather_rows(int a, std::vector<Index> rows);
    int concat_cols(const std::vector<int>& parts);
    int max_rows(int a);
    int max_pool_groups(int a, Index group_size);
    int sum(int a);
    int softmax_cross_entropy(int logits, std::vector<Index> targets);
    int reshape(int a, Shape shape);

    void bind(const std::string& name, DenseArray value);

    int node_count() const { return static_cast<int>(nodes_.size()); }
    const Shape& node_shape(int id) const { return nodes_.at(id).shape; }

    /// Forward value of a node under the current bindings.
    const DenseArray& value(int id);

    /// Row indices that won each channel's max in the last forward pass.
    /// Valid for MaxRows (one entry per column) and MaxPoolGroups (one
    /// entry per group and column, group-major).
    const std::vector<Index>& argmax_rows(int id) const;

    struct EvalResult {
        DenseArray value;
        std::map<std::string, DenseArray> gradients;  // one entry per named input
    };

    /// Forward to `out` (must be scalar) and reverse-mode gradients of it
    /// with respect to every named input.
    EvalResult evaluate_with_gradients(int out);
    EvalResult evaluate_with_gradients(int out, const std::map<std::string, DenseArray>& inputs);

private:
    struct Node {
        Op op;
        std::string name;  // inputs only
        std::vector<int> args;
        Shape shape;
        double fattr = 0.0;
        std::vector<Index> iattrs;   // gather rows / group size / CE targets
        DenseArray value;
        std::vector<Index> argmax;   // max ops, filled during forward
    };

    int push(Node n);
    const Node& checked(int id, const char* ctx) const;
    void forward_node(Node& n);
    [[noreturn]] void node_fail(const Node& n, const std::string& msg) const;

    std::vector<Node> nodes_;
    std::map<std::string, DenseArray> bindings_;
    int computed_ = 0;  // nodes [0, computed_) hold valid values
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::int64_t t = 0;
    DenseArray m;
    DenseArray v;

    static AdamState for_param(const DenseArray& param);
};

/// Bias-corrected Adam update, in place. Throws if the gradient contains
/// non-finite entries, naming the parameter.
void adam_step(DenseArray& param, const DenseArray& grad, AdamState& state,
               const AdamConfig& cfg, const std::string& param_name);

/// Ordered named parameter set (insertion order is serialization order).
class ParamStore {
public:
    void add(const std::string& name, DenseArray value);
    DenseArray& at(const std::string& name);
    const DenseArray& at(const std::string& name) const;
    bool contains(const std::string& name) const;
    const std::vector<std::string>& names() const { return order_; }

private:
    std::vector<std::string> order_;
    std::map<std::string, DenseArray> values_;
};

/// Writes <prefix>.bin (little-endian float64 blob) and <prefix>.json
/// (shapes, names, offsets, seed, config hash).
void save_weights(const std::string& prefix, const ParamStore& params,
                  std::uint64_t seed, const std::string& config_hash);

/// Loads a weight pair written by save_weights. Returns the parameters and
/// fills seed/config hash when the pointers are non-null.
ParamStore load_weights(const std::string& prefix, std::uint64_t* seed = nullptr,
                        std::string* config_hash = nullptr);

}  // namespace onh::ad
