#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gacl::ad {

using Matrix = Eigen::MatrixXd;

class ShapeMismatch : public std::invalid_argument {
 public:
  ShapeMismatch(const std::string& op, Eigen::Index lr, Eigen::Index lc, Eigen::Index rr,
                Eigen::Index rc);
  explicit ShapeMismatch(const std::string& message) : std::invalid_argument(message) {}
};

class NonScalarLoss : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Parameter;
class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the Tape lives.
class Value {
 public:
  Value() = default;

  std::uint32_t id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

  const Matrix& data() const;
  /// dLoss/dValue after backward; zeros if no gradient reached this node.
  Matrix grad() const;
  Eigen::Index rows() const { return data().rows(); }
  Eigen::Index cols() const { return data().cols(); }
  double scalar() const { return data()(0, 0); }

 private:
  friend class Tape;
  Value(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

/// Append-only record of operations for reverse-mode differentiation.
/// Inputs always precede their consumers, so a reverse sweep is a valid
/// topological order. Single-threaded.
class Tape {
 public:
  /// Backward hook for custom nodes: receives the tape and the node's own
  /// accumulated gradient, and pushes adjoints into its inputs with
  /// inject_external_gradient.
  using CustomBackward = std::function<void(Tape&, const Matrix& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Value constant(Matrix data);
  Value variable(Matrix data);
  /// Leaf bound to a parameter; backward adds its gradient into param.grad.
  Value parameter(Parameter& param);

  Value matmul(Value a, Value b);
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value mul_elementwise(Value a, Value b);
  Value concat_rows(Value a, Value b);
  Value slice_rows(Value a, Eigen::Index start, Eigen::Index count);
  Value sigmoid(Value a);
  Value tanh(Value a);
  Value square(Value a);
  Value sum(Value a);
  Value scale(Value a, double c);

  /// Node whose forward value is computed outside the tape; its gradient is
  /// propagated to `inputs` by `backward`.
  Value custom(std::vector<Value> inputs, Matrix data, CustomBackward backward);

  /// Adds `upstream` to v's adjoint. Called before backward it seeds an extra
  /// gradient source; called from a custom node it chains an external Jacobian.
  void inject_external_gradient(Value v, const Matrix& upstream);

  /// Reverse sweep from a 1x1 loss. Parameter leaves accumulate into their
  /// Parameter::grad.
  void backward(Value loss);

  const Matrix& data(Value v) const;
  Matrix grad(Value v) const;
  std::size_t size() const { return nodes_.size(); }
  void clear();

 private:
  enum class Op : std::uint8_t {
    Leaf,
    Param,
    MatMul,
    Add,
    Sub,
    Mul,
    ConcatRows,
    SliceRows,
    Sigmoid,
    Tanh,
    Square,
    Sum,
    Scale,
    Custom,
  };

  struct Node {
    Op op = Op::Leaf;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    Eigen::Index start = 0;
    double factor = 0.0;
    Matrix data;
    Matrix grad;
    Parameter* param = nullptr;
    std::size_t custom_index = 0;
  };

  Value push(Node node);
  const Node& node(Value v) const;
  void check_owner(Value v) const;
  void accumulate(std::uint32_t id, const Matrix& g);

  std::vector<Node> nodes_;
  std::vector<CustomBackward> customs_;
};

}  // namespace gacl::ad
