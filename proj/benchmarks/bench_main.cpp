#include "gacl/evaluation.hpp"
#include "gacl/loss.hpp"
#include "gacl/model.hpp"
#include "gacl/synthdata.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace gacl;

namespace {

Pose random_pose(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Quaternion q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return Pose(Vector3(n(rng), n(rng), n(rng)), q);
}

void BM_Compose(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const Pose a = random_pose(rng), b = random_pose(rng);
  for (auto _ : state) benchmark::DoNotOptimize(compose(a, b));
}
BENCHMARK(BM_Compose);

void BM_ComposeWithJacobians(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const Pose a = random_pose(rng), b = random_pose(rng);
  for (auto _ : state) benchmark::DoNotOptimize(compose_with_jacobians(a, b));
}
BENCHMARK(BM_ComposeWithJacobians);

void BM_LstmStep(benchmark::State& state) {
  const auto n = state.range(0);
  std::mt19937_64 rng(3);
  const model::LstmLayerParams p{Eigen::MatrixXd::Random(4 * n, 20 + n) * 0.1, Eigen::VectorXd::Zero(4 * n)};
  const model::LstmState s{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  const Eigen::VectorXd x = Eigen::VectorXd::Random(20);
  for (auto _ : state) benchmark::DoNotOptimize(model::lstm_cell(x, s, p));
}
BENCHMARK(BM_LstmStep)->Arg(8)->Arg(32)->Arg(128);

// Forward and backward pass of the bounded loss through the default model.
void BM_SequenceLossTrainingStep(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const int window = static_cast<int>(state.range(1));
  const model::PoseRegressor m({20, {32, 32}, 1, 32, 0.0});
  auto params = m.init_params(4);
  const Eigen::MatrixXd feats = Eigen::MatrixXd::Random(T, 20);
  const Eigen::MatrixXd gt = Eigen::MatrixXd::Random(T, 6) * 0.1;
  const loss::LossWeights weights{0.5, 1.0, 100.0, window};
  for (auto _ : state) {
    ad::Tape tape;
    const auto out = m.forward_sequence(tape, params, feats, m.zero_state());
    const auto l = loss::sequence_loss(tape, out.poses, gt, weights);
    tape.backward(l);
    benchmark::DoNotOptimize(l.scalar());
  }
  state.SetItemsProcessed(state.iterations() * T);
}
BENCHMARK(BM_SequenceLossTrainingStep)->Args({20, 2})->Args({20, 5})->Args({100, 2});

void BM_SegmentErrors(benchmark::State& state) {
  const auto seq = synth::generate(synth::MotionModel::walker(), synth::FeatureModel::preset("walker"),
                                   static_cast<int>(state.range(0)), 5);
  std::vector<Pose> noisy;
  for (const Pose& p : seq.trajectory.relatives()) {
    noisy.push_back(compose(p, euler_to_pose(Vector3(0.01, 0, 0), Vector3(0, 0, 0.002))));
  }
  const Trajectory est = accumulate(noisy);
  const auto lengths = eval::default_segment_lengths(seq.trajectory);
  for (auto _ : state) benchmark::DoNotOptimize(eval::segment_errors(seq.trajectory, est, lengths));
}
BENCHMARK(BM_SegmentErrors)->Arg(200)->Arg(1000);

}  // namespace
BENCHMARK_MAIN();
