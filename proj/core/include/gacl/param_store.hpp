#pragma once

#include "gacl/autodiff.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace gacl::ad {

/// Trainable tensor with its gradient and Adam moments (same shape as value).
struct Parameter {
  Matrix value;
  Matrix grad;
  Matrix first_moment;
  Matrix second_moment;
};

class ParamStore {
 public:
  using Map = std::map<std::string, Parameter>;

  /// Registers a parameter; throws std::invalid_argument on a duplicate name.
  Parameter& add(const std::string& name, Matrix init);
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  Map::iterator begin() { return params_.begin(); }
  Map::iterator end() { return params_.end(); }
  Map::const_iterator begin() const { return params_.begin(); }
  Map::const_iterator end() const { return params_.end(); }

  std::int64_t step() const { return step_; }
  void set_step(std::int64_t step) { step_ = step; }

  void zero_grad();
  double grad_norm() const;

 private:
  Map params_;
  std::int64_t step_ = 0;
};

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam update of every parameter; zeroes gradients afterwards.
void adam_step(ParamStore& params, const AdamOptions& options = {});

/// Rescales gradients so their global L2 norm is at most max_norm. Returns the
/// norm before clipping.
double clip_grad_norm(ParamStore& params, double max_norm);

// Checkpoint format (text, version 1):
//   GACL-CHECKPOINT 1
//   step <adam step>
//   params <count>
//   <name> <rows> <cols> <row-major values...>     (one line per parameter)
// Values use shortest round-trip decimal; parameters are sorted by name.
void save_checkpoint(const ParamStore& params, std::ostream& out);
void save_checkpoint(const ParamStore& params, const std::filesystem::path& path);
ParamStore load_checkpoint(std::istream& in);
ParamStore load_checkpoint(const std::filesystem::path& path);

}  // namespace gacl::ad
