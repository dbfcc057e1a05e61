#include "gacl/param_store.hpp"

#include "gacl/io.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace gacl::ad {

namespace {

constexpr const char* kMagic = "GACL-CHECKPOINT";
constexpr int kVersion = 1;

}  // namespace

Parameter& ParamStore::add(const std::string& name, Matrix init) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  Parameter p;
  p.grad = Matrix::Zero(init.rows(), init.cols());
  p.first_moment = Matrix::Zero(init.rows(), init.cols());
  p.second_moment = Matrix::Zero(init.rows(), init.cols());
  p.value = std::move(init);
  return params_.emplace(name, std::move(p)).first->second;
}

Parameter& ParamStore::at(const std::string& name) {
  const auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  return it->second;
}

const Parameter& ParamStore::at(const std::string& name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  return it->second;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [name, p] : params_) p.grad.setZero(p.value.rows(), p.value.cols());
}

double ParamStore::grad_norm() const {
  double sq = 0.0;
  for (const auto& [name, p] : params_) {
    if (p.grad.size() != 0) sq += p.grad.squaredNorm();
  }
  return std::sqrt(sq);
}

void adam_step(ParamStore& params, const AdamOptions& options) {
  const std::int64_t t = params.step() + 1;
  params.set_step(t);
  const double bias1 = 1.0 - std::pow(options.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(options.beta2, static_cast<double>(t));
  for (auto& [name, p] : params) {
    if (p.grad.size() == 0) p.grad = Matrix::Zero(p.value.rows(), p.value.cols());
    p.first_moment = options.beta1 * p.first_moment + (1.0 - options.beta1) * p.grad;
    p.second_moment =
        options.beta2 * p.second_moment + (1.0 - options.beta2) * p.grad.cwiseAbs2();
    const auto m_hat = p.first_moment.array() / bias1;
    const auto v_hat = p.second_moment.array() / bias2;
    p.value.array() -= options.learning_rate * m_hat / (v_hat.sqrt() + options.epsilon);
    p.grad.setZero();
  }
}

double clip_grad_norm(ParamStore& params, double max_norm) {
  const double norm = params.grad_norm();
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto& [name, p] : params) {
      if (p.grad.size() != 0) p.grad *= s;
    }
  }
  return norm;
}

void save_checkpoint(const ParamStore& params, std::ostream& out) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "step " << params.step() << '\n';
  out << "params " << params.size() << '\n';
  for (const auto& [name, p] : params) {
    out << name << ' ' << p.value.rows() << ' ' << p.value.cols();
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
        out << ' ' << io::format_double(p.value(r, c));
      }
    }
    out << '\n';
  }
}

void save_checkpoint(const ParamStore& params, const std::filesystem::path& path) {
  auto out = io::open_output(path);
  save_checkpoint(params, out);
  if (!out) throw io::IoError("failed writing " + path.string());
}

ParamStore load_checkpoint(std::istream& in) {
  const std::string source = "<checkpoint>";
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() {
    if (!std::getline(in, line)) throw io::ParseError(source, line_no + 1, "unexpected end of file");
    ++line_no;
    return io::split_whitespace(line);
  };

  auto header = next_line();
  if (header.size() != 2 || header[0] != kMagic) {
    throw io::ParseError(source, line_no, "missing " + std::string(kMagic) + " header");
  }
  if (header[1] != std::to_string(kVersion)) {
    throw io::ParseError(source, line_no, "unsupported version " + std::string(header[1]));
  }

  auto read_count = [&](const char* key) {
    auto tok = next_line();
    double v = 0.0;
    if (tok.size() != 2 || tok[0] != key || !io::parse_double(tok[1], v) || v < 0) {
      throw io::ParseError(source, line_no, std::string("expected '") + key + " <n>'");
    }
    return static_cast<std::int64_t>(v);
  };

  ParamStore store;
  store.set_step(read_count("step"));
  const std::int64_t count = read_count("params");
  for (std::int64_t k = 0; k < count; ++k) {
    auto tok = next_line();
    double rows = 0.0;
    double cols = 0.0;
    if (tok.size() < 3 || !io::parse_double(tok[1], rows) || !io::parse_double(tok[2], cols)) {
      throw io::ParseError(source, line_no, "expected '<name> <rows> <cols> values...'");
    }
    const auto r = static_cast<Eigen::Index>(rows);
    const auto c = static_cast<Eigen::Index>(cols);
    if (static_cast<Eigen::Index>(tok.size()) != 3 + r * c) {
      throw io::ParseError(source, line_no, "value count does not match shape");
    }
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r * c; ++i) {
      double v = 0.0;
      if (!io::parse_double(tok[3 + i], v)) {
        throw io::ParseError(source, line_no, "not a number: '" + std::string(tok[3 + i]) + "'");
      }
      m(i / c, i % c) = v;
    }
    store.add(std::string(tok[0]), std::move(m));
  }
  return store;
}

ParamStore load_checkpoint(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  return load_checkpoint(in);
}

}  // namespace gacl::ad
