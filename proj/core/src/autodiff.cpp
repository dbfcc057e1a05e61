#include "gacl/autodiff.hpp"

#include "gacl/param_store.hpp"

#include <cmath>

namespace gacl::ad {

namespace {

std::string shape_str(Eigen::Index r, Eigen::Index c) {
  return "(" + std::to_string(r) + "x" + std::to_string(c) + ")";
}

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch(op, a.rows(), a.cols(), b.rows(), b.cols());
  }
}

}  // namespace

ShapeMismatch::ShapeMismatch(const std::string& op, Eigen::Index lr, Eigen::Index lc,
                             Eigen::Index rr, Eigen::Index rc)
    : std::invalid_argument(op + ": shape mismatch " + shape_str(lr, lc) + " vs " +
                            shape_str(rr, rc)) {}

const Matrix& Value::data() const { return tape_->data(*this); }
Matrix Value::grad() const { return tape_->grad(*this); }

Value Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Value(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

void Tape::check_owner(Value v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) {
    throw std::invalid_argument("value does not belong to this tape");
  }
}

const Tape::Node& Tape::node(Value v) const {
  check_owner(v);
  return nodes_[v.id_];
}

const Matrix& Tape::data(Value v) const { return node(v).data; }

Matrix Tape::grad(Value v) const {
  const Node& n = node(v);
  if (n.grad.size() == 0) return Matrix::Zero(n.data.rows(), n.data.cols());
  return n.grad;
}

void Tape::clear() {
  nodes_.clear();
  customs_.clear();
}

Value Tape::constant(Matrix data) {
  Node n;
  n.data = std::move(data);
  return push(std::move(n));
}

Value Tape::variable(Matrix data) { return constant(std::move(data)); }

Value Tape::parameter(Parameter& param) {
  Node n;
  n.op = Op::Param;
  n.data = param.value;
  n.param = &param;
  return push(std::move(n));
}

Value Tape::matmul(Value a, Value b) {
  const Matrix& x = node(a).data;
  const Matrix& y = node(b).data;
  if (x.cols() != y.rows()) throw ShapeMismatch("matmul", x.rows(), x.cols(), y.rows(), y.cols());
  Node n;
  n.op = Op::MatMul;
  n.a = a.id_;
  n.b = b.id_;
  n.data = x * y;
  return push(std::move(n));
}

Value Tape::add(Value a, Value b) {
  const Matrix& x = node(a).data;
  const Matrix& y = node(b).data;
  Node n;
  n.op = Op::Add;
  n.a = a.id_;
  n.b = b.id_;
  if (y.rows() == 1 && x.rows() != 1 && y.cols() == x.cols()) {
    // Row-vector bias broadcast over rows.
    n.factor = 1.0;
    n.data = x.rowwise() + y.row(0);
  } else {
    require_same_shape("add", x, y);
    n.data = x + y;
  }
  return push(std::move(n));
}

Value Tape::sub(Value a, Value b) {
  const Matrix& x = node(a).data;
  const Matrix& y = node(b).data;
  require_same_shape("sub", x, y);
  Node n;
  n.op = Op::Sub;
  n.a = a.id_;
  n.b = b.id_;
  n.data = x - y;
  return push(std::move(n));
}

Value Tape::mul_elementwise(Value a, Value b) {
  const Matrix& x = node(a).data;
  const Matrix& y = node(b).data;
  require_same_shape("mul_elementwise", x, y);
  Node n;
  n.op = Op::Mul;
  n.a = a.id_;
  n.b = b.id_;
  n.data = x.cwiseProduct(y);
  return push(std::move(n));
}

Value Tape::concat_rows(Value a, Value b) {
  const Matrix& x = node(a).data;
  const Matrix& y = node(b).data;
  if (x.cols() != y.cols()) throw ShapeMismatch("concat_rows", x.rows(), x.cols(), y.rows(), y.cols());
  Node n;
  n.op = Op::ConcatRows;
  n.a = a.id_;
  n.b = b.id_;
  n.data.resize(x.rows() + y.rows(), x.cols());
  n.data << x, y;
  return push(std::move(n));
}

Value Tape::slice_rows(Value a, Eigen::Index start, Eigen::Index count) {
  const Matrix& x = node(a).data;
  if (start < 0 || count < 0 || start + count > x.rows()) {
    throw ShapeMismatch("slice_rows: rows [" + std::to_string(start) + ", " +
                        std::to_string(start + count) + ") out of range for " +
                        shape_str(x.rows(), x.cols()));
  }
  Node n;
  n.op = Op::SliceRows;
  n.a = a.id_;
  n.start = start;
  n.data = x.middleRows(start, count);
  return push(std::move(n));
}

Value Tape::sigmoid(Value a) {
  Node n;
  n.op = Op::Sigmoid;
  n.a = a.id_;
  n.data = node(a).data.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  return push(std::move(n));
}

Value Tape::tanh(Value a) {
  Node n;
  n.op = Op::Tanh;
  n.a = a.id_;
  n.data = node(a).data.unaryExpr([](double v) { return std::tanh(v); });
  return push(std::move(n));
}

Value Tape::square(Value a) {
  Node n;
  n.op = Op::Square;
  n.a = a.id_;
  n.data = node(a).data.cwiseAbs2();
  return push(std::move(n));
}

Value Tape::sum(Value a) {
  Node n;
  n.op = Op::Sum;
  n.a = a.id_;
  n.data = Matrix::Constant(1, 1, node(a).data.sum());
  return push(std::move(n));
}

Value Tape::scale(Value a, double c) {
  Node n;
  n.op = Op::Scale;
  n.a = a.id_;
  n.factor = c;
  n.data = c * node(a).data;
  return push(std::move(n));
}

Value Tape::custom(std::vector<Value> inputs, Matrix data, CustomBackward backward) {
  for (const Value& v : inputs) check_owner(v);
  Node n;
  n.op = Op::Custom;
  n.data = std::move(data);
  n.custom_index = customs_.size();
  customs_.push_back(std::move(backward));
  return push(std::move(n));
}

void Tape::accumulate(std::uint32_t id, const Matrix& g) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::inject_external_gradient(Value v, const Matrix& upstream) {
  const Node& n = node(v);
  require_same_shape("inject_external_gradient", n.data, upstream);
  accumulate(v.id_, upstream);
}

void Tape::backward(Value loss) {
  const Node& root = node(loss);
  if (root.data.rows() != 1 || root.data.cols() != 1) {
    throw NonScalarLoss("backward requires a 1x1 loss, got " +
                        shape_str(root.data.rows(), root.data.cols()));
  }
  accumulate(loss.id_, Matrix::Ones(1, 1));

  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    if (nodes_[i].grad.size() == 0) continue;
    const Node& n = nodes_[i];
    const Matrix& g = n.grad;
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::Param: {
        Parameter& p = *n.param;
        if (p.grad.size() == 0) {
          p.grad = g;
        } else {
          p.grad += g;
        }
        break;
      }
      case Op::MatMul: {
        const Matrix ga = g * nodes_[n.b].data.transpose();
        const Matrix gb = nodes_[n.a].data.transpose() * g;
        accumulate(n.a, ga);
        accumulate(n.b, gb);
        break;
      }
      case Op::Add:
        accumulate(n.a, g);
        if (nodes_[n.b].data.rows() == 1 && g.rows() != 1) {
          accumulate(n.b, g.colwise().sum());
        } else {
          accumulate(n.b, g);
        }
        break;
      case Op::Sub:
        accumulate(n.a, g);
        accumulate(n.b, -g);
        break;
      case Op::Mul: {
        const Matrix ga = g.cwiseProduct(nodes_[n.b].data);
        const Matrix gb = g.cwiseProduct(nodes_[n.a].data);
        accumulate(n.a, ga);
        accumulate(n.b, gb);
        break;
      }
      case Op::ConcatRows: {
        const Eigen::Index ra = nodes_[n.a].data.rows();
        const Eigen::Index rb = nodes_[n.b].data.rows();
        accumulate(n.a, g.topRows(ra));
        accumulate(n.b, g.bottomRows(rb));
        break;
      }
      case Op::SliceRows: {
        Matrix full = Matrix::Zero(nodes_[n.a].data.rows(), nodes_[n.a].data.cols());
        full.middleRows(n.start, g.rows()) = g;
        accumulate(n.a, full);
        break;
      }
      case Op::Sigmoid: {
        const Matrix& y = n.data;
        accumulate(n.a, g.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
        break;
      }
      case Op::Tanh: {
        const Matrix& y = n.data;
        accumulate(n.a, g.cwiseProduct((1.0 - y.array().square()).matrix()));
        break;
      }
      case Op::Square:
        accumulate(n.a, 2.0 * g.cwiseProduct(nodes_[n.a].data));
        break;
      case Op::Sum: {
        const Matrix& x = nodes_[n.a].data;
        accumulate(n.a, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
        break;
      }
      case Op::Scale:
        accumulate(n.a, n.factor * g);
        break;
      case Op::Custom: {
        // The callback may append to the tape, so pass copies.
        const CustomBackward fn = customs_[n.custom_index];
        const Matrix grad_out = g;
        fn(*this, grad_out);
        break;
      }
    }
  }
}

}  // namespace gacl::ad
