// cfr: synthetic multispectral data generation, two-stream detector training
// with cyclic fuse-and-refine fusion, evaluation, ablation sweeps, and
// gradient checking.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "cfr/ablate.hpp"
#include "cfr/config.hpp"
#include "cfr/evaluator.hpp"
#include "cfr/gradcheck_suite.hpp"
#include "cfr/synthetic.hpp"
#include "cfr/trainer.hpp"

namespace fs = std::filesystem;

namespace {

struct CliOverrides {
  std::string config_path;
  std::string out_dir;
  std::string data_dir;
  std::string checkpoint;
  std::string preset;
  std::string loops_list;
  int64_t seed = -1;
  bool timing = false;
};

cfr::RunConfig resolve_config(const CliOverrides& o, bool loops_is_list) {
  cfr::RunConfig cfg;
  if (!o.config_path.empty()) cfg = cfr::RunConfig::from_file(o.config_path);
  if (o.seed >= 0) cfg.seed = static_cast<uint64_t>(o.seed);
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (!o.data_dir.empty()) cfg.data_dir = o.data_dir;
  if (!o.checkpoint.empty()) cfg.checkpoint = o.checkpoint;
  if (!o.preset.empty()) cfg.preset = o.preset;
  if (o.timing) cfg.timing = true;
  if (!o.loops_list.empty()) {
    std::vector<int> loops;
    std::string cur;
    for (char c : o.loops_list + ",") {
      if (c == ',') {
        if (!cur.empty()) loops.push_back(std::stoi(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (loops.empty()) throw cfr::ConfigError("--loops: empty list");
    if (loops_is_list) {
      cfg.loop_counts = loops;
    } else {
      if (loops.size() != 1)
        throw cfr::ConfigError("--loops: this command takes a single loop count");
      cfg.loops = loops[0];
    }
  }
  cfg.validate();
  return cfg;
}

void add_common_flags(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--config", o.config_path, "config file (key = value lines)");
  cmd->add_option("--seed", o.seed, "override the run seed");
  cmd->add_option("--loops", o.loops_list, "cyclic loop count(s), comma separated");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--preset", o.preset, "anchor preset: pedestrian or multiclass")
      ->check(CLI::IsMember({"pedestrian", "multiclass"}));
  cmd->add_option("--data", o.data_dir, "dataset directory");
  cmd->add_option("--checkpoint", o.checkpoint, "checkpoint path (eval)");
  cmd->add_flag("--timing", o.timing, "measure inference timing per loop count");
}

void write_resolved(const cfr::RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  std::ofstream os(fs::path(cfg.out_dir) / "config.resolved", std::ios::binary);
  if (!os) throw cfr::IoError("cannot write config.resolved under " + cfg.out_dir);
  os << cfg.resolved();
}

int cmd_gen_data(const CliOverrides& o) {
  cfr::RunConfig cfg = resolve_config(o, false);
  const std::string dest = !o.out_dir.empty() ? o.out_dir : cfg.data_dir;
  const cfr::DatasetPaths paths = cfr::generate_dataset(cfg.scene_spec(), cfg.n_train,
                                                        cfg.n_test, cfg.seed, dest);
  std::cout << "wrote " << cfg.n_train << " train / " << cfg.n_test
            << " test samples\n";
  std::cout << "train manifest: " << paths.train_manifest << "\n";
  std::cout << "test manifest:  " << paths.test_manifest << "\n";
  return 0;
}

int cmd_train(const CliOverrides& o) {
  cfr::RunConfig cfg = resolve_config(o, false);
  const auto train_samples = cfr::load_split(cfg.data_dir, "train");
  cfr::DetectorModelT<float> model = cfr::build_model(cfg);
  write_resolved(cfg);
  std::ofstream log_file(fs::path(cfg.out_dir) / "train.log", std::ios::binary);
  if (!log_file) throw cfr::IoError("cannot write train.log under " + cfg.out_dir);
  struct Tee : std::ostream, std::streambuf {
    std::ostream &a, &b;
    Tee(std::ostream& x, std::ostream& y) : std::ostream(this), a(x), b(y) {}
    int overflow(int c) override {
      if (c != EOF) {
        a.put(static_cast<char>(c));
        b.put(static_cast<char>(c));
      }
      return c;
    }
  } tee(std::cout, log_file);
  const cfr::TrainResult result = cfr::train_model(cfg, model, train_samples, tee);
  std::cout << "final checkpoint: " << result.checkpoint_path << "\n";
  return 0;
}

int cmd_eval(const CliOverrides& o) {
  cfr::RunConfig cfg = resolve_config(o, false);
  if (cfg.checkpoint.empty())
    throw cfr::ConfigError("eval requires a checkpoint (--checkpoint or config key)");
  const auto test_samples = cfr::load_split(cfg.data_dir, "test");
  cfr::DetectorModelT<float> model = cfr::build_model(cfg);
  auto state = model.collect_state();
  cfr::load_state(state, cfr::load_checkpoint<float>(cfg.checkpoint));
  const cfr::EvalReport report =
      cfr::evaluate_model(cfg, model, test_samples, cfg.out_dir, &std::cout);
  std::cout << cfr::format_report(report);
  return 0;
}

int cmd_ablate(const CliOverrides& o) {
  cfr::RunConfig cfg = resolve_config(o, true);
  const auto train_samples = cfr::load_split(cfg.data_dir, "train");
  const auto test_samples = cfr::load_split(cfg.data_dir, "test");
  write_resolved(cfg);
  const cfr::AblationTable table =
      cfr::run_ablation(cfg, train_samples, test_samples, cfg.out_dir, std::cout);
  std::cout << cfr::format_ablation(table);
  for (const auto& cell : table.cells)
    if (!cell.ok)
      std::cout << "warning: cell loops=" << cell.loops << " seed=" << cell.seed_idx
                << " absent: " << cell.error << "\n";
  return 0;
}

int cmd_gradcheck(const CliOverrides& o) {
  const uint64_t seed = o.seed >= 0 ? static_cast<uint64_t>(o.seed) : 12345;
  const auto reports = cfr::run_gradcheck_suite(seed);
  bool all_pass = true;
  std::cout << std::left << std::setw(28) << "op" << std::setw(14) << "max_rel_err"
            << "status\n";
  for (const auto& r : reports) {
    std::cout << std::left << std::setw(28) << r.op << std::setw(14) << std::scientific
              << std::setprecision(3) << r.max_rel_err << (r.pass ? "pass" : "FAIL");
    if (!r.pass) std::cout << "  (" << r.note << ")";
    std::cout << "\n";
    all_pass = all_pass && r.pass;
  }
  std::cout << (all_pass ? "gradcheck: all ops pass\n" : "gradcheck: FAILURES above\n");
  return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cyclic fuse-and-refine multispectral detection workbench"};
  app.require_subcommand(1);

  CliOverrides o;
  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  CLI::App* train = app.add_subcommand("train", "train a detector");
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  CLI::App* ablate = app.add_subcommand("ablate", "loop-count ablation sweep");
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  for (CLI::App* cmd : {gen, train, eval, ablate, gradcheck}) add_common_flags(cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(o);
    if (train->parsed()) return cmd_train(o);
    if (eval->parsed()) return cmd_eval(o);
    if (ablate->parsed()) return cmd_ablate(o);
    if (gradcheck->parsed()) return cmd_gradcheck(o);
  } catch (const cfr::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
