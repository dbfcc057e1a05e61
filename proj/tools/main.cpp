#include "gacl/config.hpp"
#include "gacl/evaluation.hpp"
#include "gacl/io.hpp"
#include "gacl/reports.hpp"
#include "gacl/synthdata.hpp"
#include "gacl/trainer.hpp"
#include "gacl/version.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace gacl;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

/// Flags shared by train, ablate and alpha-sweep. Each one overrides the
/// matching config-file key.
struct RunFlags {
  std::string config_path;
  std::string out;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> data;
  std::optional<int> threads;
  std::optional<int> max_epochs;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run config file (key = value)")->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "Output directory")->required();
    cmd->add_option("--set", sets, "Override a config key: section.key=value");
    cmd->add_option("--seed", seed, "Master seed (train.seed)");
    cmd->add_option("--data", data, "Dataset directory (data.path)");
    cmd->add_option("--threads", threads, "Worker threads (train.threads)");
    cmd->add_option("--max-epochs", max_epochs, "Per-stage epoch cap (schedule.max_epochs)");
  }

  config::KeyValueConfig resolve() const {
    auto kv = config_path.empty() ? config::KeyValueConfig{} : config::KeyValueConfig::load(config_path);
    for (const auto& s : sets) kv.set_assignment(s);
    if (seed) kv.set("train.seed", std::to_string(*seed));
    if (data) kv.set("data.path", *data);
    if (threads) kv.set("train.threads", std::to_string(*threads));
    if (max_epochs) kv.set("schedule.max_epochs", std::to_string(*max_epochs));
    kv.set("output.dir", out);
    return kv;
  }
};

void write_file(const fs::path& path, const std::string& content) {
  auto out = io::open_output(path);
  out << content;
  if (!out) throw io::IoError("failed writing " + path.string());
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn) {
  auto out = io::open_output(path);
  fn(out);
  if (!out) throw io::IoError("failed writing " + path.string());
}

void write_plain_manifest(const fs::path& path, const std::string& command,
                          const std::map<std::string, std::string>& args,
                          const std::vector<std::string>& files) {
  config::KeyValueConfig kv;
  for (const auto& [k, v] : args) kv.set(k, v);
  kv.set("manifest.tool", kToolName);
  kv.set("manifest.version", kVersion);
  kv.set("manifest.command", command);
  std::string list;
  for (const auto& f : files) list += (list.empty() ? "" : " ") + f;
  kv.set("manifest.files", list);
  write_file(path, kv.dump());
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// ---- gen-data ---------------------------------------------------------------

struct GenDataFlags {
  std::string config_path;
  std::optional<std::string> preset;
  std::optional<int> sequences;
  std::optional<int> length;
  std::optional<std::uint64_t> seed;
  std::optional<double> noise;
  std::string out;
};

int run_gen_data(const GenDataFlags& f) {
  auto kv = f.config_path.empty() ? config::KeyValueConfig{} : config::KeyValueConfig::load(f.config_path);
  if (f.preset) kv.set("data.preset", *f.preset);
  if (f.sequences) kv.set("data.sequences", std::to_string(*f.sequences));
  if (f.length) kv.set("data.length", std::to_string(*f.length));
  if (f.seed) kv.set("train.seed", std::to_string(*f.seed));
  if (f.noise) kv.set("data.noise", io::format_double(*f.noise));
  const auto cfg = train::RunConfig::from_config(kv);
  if (!cfg.data.path.empty()) throw config::ConfigError({"data.path: gen-data generates data; unset it"});

  const std::uint64_t seed = cfg.data.seed.value_or(cfg.seed);
  const auto sequences = train::generate_sequences(cfg.data, seed);
  const auto resolved = cfg.to_config();
  synth::Meta meta{{"preset", cfg.data.preset},
                   {"length", std::to_string(cfg.data.length)},
                   {"seed", std::to_string(seed)},
                   {"noise", *resolved.get("data.noise")},
                   {"tool", std::string(kToolName) + " " + kVersion}};
  synth::write_dataset(f.out, sequences, meta);

  std::vector<std::string> files{"meta.txt"};
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    files.push_back("poses/" + synth::sequence_name(i) + ".txt");
    files.push_back("features/" + synth::sequence_name(i) + ".csv");
  }
  std::map<std::string, std::string> args;
  for (const auto& key : {"data.preset", "data.sequences", "data.length", "data.noise", "data.seed"}) {
    args[key] = *resolved.get(key);
  }
  write_plain_manifest(fs::path(f.out) / "manifest.txt", "gen-data", args, files);
  std::cout << "wrote " << sequences.size() << " sequences to " << f.out << '\n';
  return 0;
}

// ---- train / ablate / alpha-sweep -------------------------------------------

int run_train(const RunFlags& flags, const std::optional<std::string>& mode) {
  auto kv = flags.resolve();
  if (mode) kv.set("schedule.mode", *mode);
  const auto cfg = train::RunConfig::from_config(kv);
  const auto result = train::train(cfg, [](const train::EpochRecord& e) {
    std::cerr << "epoch " << e.epoch << " stage " << e.stage << " alpha " << e.alpha << " train "
              << fmt(e.train_loss) << " val " << fmt(e.validation_loss)
              << (e.transition != curriculum::TransitionReason::None
                      ? " -> stage end (" + curriculum::to_string(e.transition) + ")"
                      : "")
              << '\n';
  });
  const auto& m = result.log.final_metrics;
  std::cout << "epochs: " << result.log.epochs.size() << ", stages: " << result.log.stages.size()
            << "\nheld-out segment error: " << fmt(m.segments.mean_translation_pct()) << " %, "
            << fmt(m.segments.mean_rotation_deg_per_m()) << " deg/m\n"
            << "held-out frame error: " << fmt(m.rpe.translation_pct) << " %, "
            << fmt(m.rpe.rotation_deg) << " deg\nartifacts: " << cfg.output_dir << '\n';
  return 0;
}

int run_ablate(const RunFlags& flags, const std::vector<std::uint64_t>& seeds_flag) {
  auto kv = flags.resolve();
  if (!seeds_flag.empty()) {
    std::string list;
    for (auto s : seeds_flag) list += (list.empty() ? "" : ",") + std::to_string(s);
    kv.set("ablate.seeds", list);
  }
  const auto cfg = train::RunConfig::from_config(kv);
  const auto report = train::ablate(cfg, cfg.ablation_seeds);
  const fs::path out = cfg.output_dir;
  write_with(out / "ablation_summary.csv", [&](std::ostream& o) { train::write_ablation_summary_csv(o, report); });
  write_with(out / "ablation_stages.csv", [&](std::ostream& o) { train::write_ablation_stages_csv(o, report); });
  write_with(out / "ablation_curves.csv", [&](std::ostream& o) { train::write_ablation_curves_csv(o, report); });
  auto in = io::open_input(out / "ablation_curves.csv");
  write_file(out / "ablation_curves.svg",
             plot::chart_from_report(io::parse_csv(in, "ablation_curves.csv")).render());
  train::write_manifest(out, "ablate", cfg,
                        {"ablation_summary.csv", "ablation_stages.csv", "ablation_curves.csv",
                         "ablation_curves.svg"});

  std::map<std::string, std::pair<double, int>> mean;
  std::vector<std::string> order;
  for (const auto& c : report.cells) {
    if (!mean.count(c.mode)) order.push_back(c.mode);
    mean[c.mode].first += c.log.final_metrics.segments.mean_translation_pct();
    mean[c.mode].second += 1;
  }
  std::cout << "mean held-out segment translation error (%):\n";
  for (const auto& m : order) std::cout << "  " << m << ": " << fmt(mean[m].first / mean[m].second) << '\n';
  return 0;
}

int run_sweep(const RunFlags& flags, const std::vector<double>& alphas_flag,
              const std::optional<int>& epochs_flag, const std::vector<std::uint64_t>& seeds) {
  auto kv = flags.resolve();
  if (!alphas_flag.empty()) {
    std::string list;
    for (double a : alphas_flag) list += (list.empty() ? "" : ",") + io::format_double(a);
    kv.set("sweep.alphas", list);
  }
  if (epochs_flag) kv.set("sweep.epochs", std::to_string(*epochs_flag));
  const auto cfg = train::RunConfig::from_config(kv);
  std::vector<train::SweepResult> results;
  for (auto s : seeds.empty() ? std::vector<std::uint64_t>{cfg.seed} : seeds) {
    auto c = cfg;
    c.seed = s;
    results.push_back(train::alpha_sweep(c, cfg.sweep_alphas, cfg.sweep_epochs));
  }
  const fs::path out = cfg.output_dir;
  write_with(out / "alpha_sweep.csv", [&](std::ostream& o) { train::write_sweep_csv(o, results); });
  auto in = io::open_input(out / "alpha_sweep.csv");
  write_file(out / "alpha_sweep.svg", plot::chart_from_report(io::parse_csv(in, "alpha_sweep.csv")).render());
  train::write_manifest(out, "alpha-sweep", cfg, {"alpha_sweep.csv", "alpha_sweep.svg"});
  for (const auto& r : results) {
    std::cout << "seed " << r.seed << ':';
    for (const auto& p : r.points) std::cout << "  a=" << p.alpha << " t=" << fmt(p.normalized_translation);
    std::cout << '\n';
  }
  return 0;
}

// ---- eval / plot -------------------------------------------------------------

int run_eval(const std::string& gt_path, const std::string& est_path,
             const std::vector<double>& segments, const std::string& out_dir) {
  const auto gt = io::read_kitti_poses(gt_path);
  const auto est = io::read_kitti_poses(est_path);
  if (gt.size() != est.size()) {
    throw eval::LengthMismatch("line count mismatch: " + gt_path + " has " + std::to_string(gt.size()) +
                               " poses, " + est_path + " has " + std::to_string(est.size()));
  }
  const auto lengths = segments.empty() ? eval::default_segment_lengths(gt) : segments;
  const fs::path out = out_dir;
  std::vector<std::string> files{"rpe.csv", "ate.csv", "ate_cdf.csv", "ate_cdf.svg", "trajectory.svg"};
  const auto r = eval::rpe(gt, est);
  const auto a = eval::ate(gt, est);
  write_with(out / "rpe.csv", [&](std::ostream& o) { eval::write_rpe_csv(o, r); });
  write_with(out / "ate.csv", [&](std::ostream& o) { eval::write_ate_csv(o, a); });
  write_with(out / "ate_cdf.csv", [&](std::ostream& o) { eval::write_ate_cdf_csv(o, a); });
  {
    auto in = io::open_input(out / "ate_cdf.csv");
    write_file(out / "ate_cdf.svg", plot::chart_from_report(io::parse_csv(in, "ate_cdf.csv")).render());
  }
  write_file(out / "trajectory.svg", plot::trajectory_chart(gt, est).render());
  std::cout << "frame error: " << fmt(r.translation_pct) << " %, " << fmt(r.rotation_deg)
            << " deg; ATE rmse " << fmt(a.rmse) << " m\n";
  if (!lengths.empty()) {
    const auto seg = eval::segment_errors(gt, est, lengths);
    write_with(out / "segments.csv", [&](std::ostream& o) { eval::write_segment_csv(o, seg); });
    auto in = io::open_input(out / "segments.csv");
    write_file(out / "segments.svg", plot::chart_from_report(io::parse_csv(in, "segments.csv")).render());
    files.insert(files.end(), {"segments.csv", "segments.svg"});
    std::cout << "segment error: " << fmt(seg.mean_translation_pct()) << " %, "
              << fmt(seg.mean_rotation_deg_per_m()) << " deg/m\n";
  } else {
    std::cerr << "note: trajectory too short for any segment length; no segment report\n";
  }
  std::string seg_list;
  for (double l : lengths) seg_list += (seg_list.empty() ? "" : ",") + io::format_double(l);
  write_plain_manifest(out / "manifest.txt", "eval",
                       {{"eval.gt", gt_path}, {"eval.est", est_path}, {"eval.segments", seg_list}}, files);
  return 0;
}

int run_plot(const std::string& runlog, const std::string& report, const std::string& out) {
  const bool is_runlog = !runlog.empty();
  const auto table = io::read_csv(is_runlog ? runlog : report);
  const auto chart = is_runlog ? plot::chart_from_runlog(table) : plot::chart_from_report(table);
  write_file(out, chart.render());
  write_plain_manifest(out + ".manifest.txt", "plot",
                       {{is_runlog ? "plot.runlog" : "plot.report", is_runlog ? runlog : report}},
                       {fs::path(out).filename().string()});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pose regression training with a geometry-aware curriculum"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
  app.require_subcommand(1);

  GenDataFlags gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  gen_cmd->add_option("--config", gen.config_path, "Config file; data.* keys are used")->check(CLI::ExistingFile);
  gen_cmd->add_option("--preset", gen.preset, "vehicle or walker");
  gen_cmd->add_option("--sequences", gen.sequences, "Number of sequences");
  gen_cmd->add_option("--length", gen.length, "Relative steps per sequence");
  gen_cmd->add_option("--seed", gen.seed, "Seed");
  gen_cmd->add_option("--noise", gen.noise, "Feature noise sigma (default: preset)");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  RunFlags train_flags;
  std::optional<std::string> mode;
  auto* train_cmd = app.add_subcommand("train", "Train one model");
  train_flags.attach(train_cmd);
  train_cmd->add_option("--mode", mode, "curriculum, anti-curriculum or fixed");

  RunFlags ablate_flags;
  std::vector<std::uint64_t> ablate_seeds;
  auto* ablate_cmd = app.add_subcommand("ablate", "Compare curriculum, anti-curriculum and fixed objectives");
  ablate_flags.attach(ablate_cmd);
  ablate_cmd->add_option("--seeds", ablate_seeds, "Seeds (at least two)")->delimiter(',');

  RunFlags sweep_flags;
  std::vector<double> sweep_alphas;
  std::optional<int> sweep_epochs;
  std::vector<std::uint64_t> sweep_seeds;
  auto* sweep_cmd = app.add_subcommand("alpha-sweep", "Single-stage training over a list of alphas");
  sweep_flags.attach(sweep_cmd);
  sweep_cmd->add_option("--alphas", sweep_alphas, "Alphas in [0, 1]")->delimiter(',');
  sweep_cmd->add_option("--epochs", sweep_epochs, "Epoch cap per alpha");
  sweep_cmd->add_option("--seeds", sweep_seeds, "Seeds (default: train.seed)")->delimiter(',');

  std::string gt_path;
  std::string est_path;
  std::vector<double> segments;
  std::string eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Score an estimated trajectory against ground truth");
  eval_cmd->add_option("--gt", gt_path, "Ground-truth KITTI pose file")->required();
  eval_cmd->add_option("--est", est_path, "Estimated KITTI pose file")->required();
  eval_cmd->add_option("--segments", segments, "Segment lengths in meters")->delimiter(',');
  eval_cmd->add_option("--out", eval_out, "Output directory")->required();

  std::string runlog;
  std::string report;
  std::string plot_out;
  auto* plot_cmd = app.add_subcommand("plot", "Render a run log or report as SVG");
  auto* runlog_opt = plot_cmd->add_option("--runlog", runlog, "runlog.csv from train");
  auto* report_opt = plot_cmd->add_option("--report", report, "Report CSV from ablate, alpha-sweep or eval");
  runlog_opt->excludes(report_opt);
  plot_cmd->add_option("--out", plot_out, "Output SVG file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsageError;
  }

  try {
    if (*gen_cmd) return run_gen_data(gen);
    if (*train_cmd) return run_train(train_flags, mode);
    if (*ablate_cmd) return run_ablate(ablate_flags, ablate_seeds);
    if (*sweep_cmd) return run_sweep(sweep_flags, sweep_alphas, sweep_epochs, sweep_seeds);
    if (*eval_cmd) return run_eval(gt_path, est_path, segments, eval_out);
    if (*plot_cmd) {
      if (runlog.empty() == report.empty()) {
        std::cerr << "error: plot needs exactly one of --runlog or --report\n";
        return kUsageError;
      }
      return run_plot(runlog, report, plot_out);
    }
  } catch (const config::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
