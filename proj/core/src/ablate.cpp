#include "cfr/ablate.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "cfr/trainer.hpp"

namespace fs = std::filesystem;

namespace cfr {

int sweep_worker_count(int n_cells) {
  int workers = 0;
  if (const char* env = std::getenv("CFR_THREADS")) {
    try {
      workers = std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError("CFR_THREADS must be an integer");
    }
    CFR_CHECK(workers >= 1, "CFR_THREADS must be >= 1");
  } else {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
  }
  return std::min(workers, std::max(n_cells, 1));
}

namespace {

AblationCell run_cell(const RunConfig& base, int loops, int seed_idx,
                      const std::vector<SpectralSample>& train_samples,
                      const std::vector<SpectralSample>& test_samples,
                      const std::string& out_dir) {
  AblationCell cell;
  cell.loops = loops;
  cell.seed_idx = seed_idx;
  try {
    RunConfig cfg = base;
    cfg.loops = std::max(loops, 1);
    cfg.fusion = loops == 0 ? "average" : "cfr";
    cfg.seed = Rng::mix(base.seed, 9000 + static_cast<uint64_t>(seed_idx));
    cfg.timing = false;
    std::string cell_dir;
    if (!out_dir.empty()) {
      cell_dir = (fs::path(out_dir) / "cells" /
                  ("loops" + std::to_string(loops) + "_seed" + std::to_string(seed_idx)))
                     .string();
      fs::create_directories(cell_dir);
    }
    cfg.out_dir = cell_dir;

    DetectorModelT<float> model = build_model(cfg);
    std::ofstream train_log;
    std::ostringstream null_log;
    std::ostream* log = &null_log;
    if (!cell_dir.empty()) {
      train_log.open(fs::path(cell_dir) / "train.log", std::ios::binary);
      if (train_log) log = &train_log;
    }
    train_model(cfg, model, train_samples, *log, !cell_dir.empty());
    EvalReport report = evaluate_model(cfg, model, test_samples, cell_dir, log);
    cell.map = report.map.map;
    cell.lamr_defined = report.lamr.defined;
    cell.lamr = report.lamr.value;
    cell.dice = report.dice_per_loop;
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.ok = false;
    cell.error = e.what();
  }
  return cell;
}

}  // namespace

AblationTable run_ablation(const RunConfig& cfg,
                           const std::vector<SpectralSample>& train_samples,
                           const std::vector<SpectralSample>& test_samples,
                           const std::string& out_dir, std::ostream& log) {
  cfg.validate();
  struct CellSpec {
    int loops, seed_idx;
  };
  std::vector<CellSpec> specs;
  for (int loops : cfg.loop_counts)
    for (int s = 0; s < cfg.n_seeds; ++s) specs.push_back({loops, s});

  AblationTable table;
  table.cells.resize(specs.size());
  const int workers = sweep_worker_count(static_cast<int>(specs.size()));
  log << "ablation sweep: " << specs.size() << " cells on " << workers << " workers\n";
  log.flush();

  std::atomic<size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= specs.size()) return;
      table.cells[i] = run_cell(cfg, specs[i].loops, specs[i].seed_idx, train_samples,
                                test_samples, out_dir);
      std::lock_guard<std::mutex> lock(log_mutex);
      const AblationCell& c = table.cells[i];
      log << "cell loops=" << c.loops << " seed=" << c.seed_idx << ": "
          << (c.ok ? "ok" : std::string("FAILED: ") + c.error);
      if (c.ok) log << "  map " << std::fixed << std::setprecision(4) << c.map;
      log << "\n";
      log.flush();
    }
  };
  std::vector<std::thread> threads;
  for (int t = 0; t < workers; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  for (int loops : cfg.loop_counts) {
    AblationTable::Row row;
    row.loops = loops;
    double lamr_sum = 0.0;
    int lamr_n = 0;
    std::vector<double> dice_sum(std::max(loops, 0), 0.0);
    int dice_n = 0;
    for (const AblationCell& c : table.cells) {
      if (c.loops != loops || !c.ok) continue;
      ++row.n_ok;
      row.mean_map += c.map;
      if (c.lamr_defined) {
        lamr_sum += c.lamr;
        ++lamr_n;
      }
      if (static_cast<int>(c.dice.size()) == loops && loops > 0) {
        for (int l = 0; l < loops; ++l) dice_sum[l] += c.dice[l];
        ++dice_n;
      }
    }
    if (row.n_ok > 0) row.mean_map /= row.n_ok;
    if (lamr_n > 0) {
      row.mean_lamr = lamr_sum / lamr_n;
      row.lamr_defined = true;
    }
    if (dice_n > 0)
      for (double d : dice_sum) row.mean_dice.push_back(d / dice_n);
    table.rows.push_back(row);
  }

  // serial timing pass at fixed shape: one cyclic model, loop count varied
  {
    RunConfig tcfg = cfg;
    tcfg.fusion = "cfr";
    tcfg.loops = 4;
    tcfg.seed = Rng::mix(cfg.seed, 424242);
    DetectorModelT<float> model = build_model(tcfg);
    std::vector<int> counts;
    for (int l : cfg.loop_counts)
      if (l >= 1) counts.push_back(l);
    if (counts.empty()) counts = {1, 2, 3, 4};
    table.timing = time_loop_counts(model, test_samples[0], counts, cfg.timing_warmup,
                                    cfg.timing_iters);
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    {
      std::ofstream os(fs::path(out_dir) / "ablation.csv", std::ios::binary);
      if (!os) throw IoError("cannot write ablation.csv under " + out_dir);
      int max_loops = 0;
      for (int l : cfg.loop_counts) max_loops = std::max(max_loops, l);
      os << "loops,seed,status,map,lamr";
      for (int l = 1; l <= max_loops; ++l) os << ",dice_" << l;
      os << "\n" << std::setprecision(10);
      auto emit = [&](const std::string& seed_field, int loops, bool ok,
                      const std::string& err, double map, bool lamr_def, double lamr,
                      const std::vector<double>& dice) {
        os << loops << "," << seed_field << ",";
        if (!ok) {
          os << "failed";
          for (int l = 0; l < max_loops + 2; ++l) os << ",";
          os << "\n";
          (void)err;
          return;
        }
        os << "ok," << map << "," << (lamr_def ? std::to_string(lamr) : "absent");
        for (int l = 0; l < max_loops; ++l) {
          os << ",";
          if (l < static_cast<int>(dice.size())) os << dice[l];
        }
        os << "\n";
      };
      for (const AblationCell& c : table.cells)
        emit(std::to_string(c.seed_idx), c.loops, c.ok, c.error, c.map, c.lamr_defined,
             c.lamr, c.dice);
      for (const auto& r : table.rows)
        emit("mean", r.loops, r.n_ok > 0, "", r.mean_map, r.lamr_defined, r.mean_lamr,
             r.mean_dice);
    }
    {
      std::ofstream os(fs::path(out_dir) / "ablation.txt", std::ios::binary);
      if (!os) throw IoError("cannot write ablation.txt under " + out_dir);
      os << "[config]\n" << cfg.resolved();
      os << format_ablation(table);
    }
  }
  return table;
}

std::string format_ablation(const AblationTable& table) {
  std::ostringstream os;
  os << "[ablation]\n";
  os << std::left << std::setw(10) << "method" << std::setw(12) << "miss_rate"
     << std::setw(10) << "mAP" << "DICE scores\n";
  for (const auto& r : table.rows) {
    const std::string name = r.loops == 0 ? "Baseline" : "CFR_" + std::to_string(r.loops);
    os << std::left << std::setw(10) << name;
    std::ostringstream mr, map;
    if (r.n_ok == 0) {
      os << std::setw(12) << "absent" << std::setw(10) << "absent" << "-\n";
      continue;
    }
    mr << std::fixed << std::setprecision(4);
    if (r.lamr_defined) mr << r.mean_lamr;
    else mr << "absent";
    map << std::fixed << std::setprecision(4) << r.mean_map;
    os << std::setw(12) << mr.str() << std::setw(10) << map.str();
    if (r.mean_dice.empty()) {
      os << "-";
    } else {
      os << "{";
      for (size_t i = 0; i < r.mean_dice.size(); ++i) {
        if (i) os << ", ";
        os << std::fixed << std::setprecision(4) << r.mean_dice[i];
      }
      os << "}";
    }
    os << "  (n=" << r.n_ok << ")\n";
  }
  if (!table.timing.empty()) {
    os << "[timing]\n";
    for (const auto& [loops, stat] : table.timing)
      os << "loops" << loops << ".median_ms = " << stat.median_ms << "\n";
  }
  return os.str();
}

}  // namespace cfr
