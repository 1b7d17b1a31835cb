// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fpim/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <memory>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "fpim/diffusion.hpp"
#include "fpim/oracle.hpp"
#include "fpim/parallel.hpp"
#include "fpim/random.hpp"
#include "fpim/rr_index.hpp"

namespace fpim {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& known_algorithms() {
  static const std::vector<std::string> names{
      "RF", "IM", "CD", "2CD", "Ada", "Ada+CD", "Ada+GS", "Ada+MGS"};
  return names;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw ArgumentError(what); };
  if (alphas.empty()) fail("at least one alpha is required");
  for (double a : alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) fail("alpha must be > 0");
  }
  if (repetitions < 1) fail("repetitions must be >= 1");
  if (!split_heuristic && !(split_b1 > 0.0 && split_b2 > 0.0)) {
    fail("budget split parts must be positive");
  }
  if (budgets.empty()) fail("at least one budget is required");
  for (double b : budgets) {
    if (!(b > 0.0) || !std::isfinite(b)) fail("budgets must be > 0");
  }
  if (x_size < 1) fail("|X| must be >= 1");
  if (mc_runs < 1) fail("evaluation runs must be >= 1");
  if (f_samples < 1) fail("f samples must be >= 1");
  if (cd_iters < 1 || two_stage_iters < 1 || ada_cd_iters < 1) {
    fail("CD iterations must be >= 1");
  }
  if (rate_levels < 1) fail("rate levels must be >= 1");
  DiscountRateSet check(stage2_rates);
  if (delta_samples < 1) fail("delta samples must be >= 1");
  if (algorithms.empty()) fail("algorithm roster is empty");
  const auto& known = known_algorithms();
  for (const auto& a : algorithms) {
    if (std::find(known.begin(), known.end(), a) == known.end()) {
      fail("unknown algorithm: " + a);
    }
  }
  if (dataset.empty()) {
    if (synthetic_m < 1) fail("synthetic m must be >= 1");
    if (synthetic_n <= synthetic_m) fail("synthetic n must exceed m");
  }
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                               EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw DatasetError("sha256 unavailable");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return hex.str();
}

namespace {

std::uint64_t derive(std::uint64_t master, std::string_view tag,
                     std::initializer_list<std::uint64_t> keys) {
  std::uint64_t s = mix_tags(master, stream_tag(tag));
  for (std::uint64_t k : keys) s = mix_tags(s, k);
  return s;
}

std::uint64_t key(double v) { return std::bit_cast<std::uint64_t>(v); }

std::string dataset_label(const ExperimentConfig& cfg) {
  if (!cfg.dataset_name.empty()) return cfg.dataset_name;
  if (!cfg.dataset.empty()) return fs::path(cfg.dataset).stem().string();
  return "pa-n" + std::to_string(cfg.synthetic_n) + "-m" +
         std::to_string(cfg.synthetic_m);
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

json alloc_json(const DiscountAllocation& a, const Graph& g) {
  json out = json::object();
  for (const auto& [u, c] : a.entries()) out[std::to_string(g.label(u))] = c;
  return out;
}

json trace_json(const std::string& stage, const DiscountAllocation& alloc,
                const std::vector<double>& trace,
                const std::vector<PairStepRecord>& steps, const Graph& g) {
  json steps_j = json::array();
  for (const auto& s : steps) steps_j.push_back({s.i, s.j, s.before, s.after});
  return {{"stage", stage},
          {"budget", alloc.budget()},
          {"iterations", trace.empty() ? 0 : trace.size() - 1},
          {"allocation", alloc_json(alloc, g)},
          {"trace", trace},
          {"steps", steps_j}};
}

Stage2Mode stage2_mode_of(const std::string& name) {
  if (name == "Ada+CD") return Stage2Mode::kCd;
  if (name == "Ada+GS") return Stage2Mode::kGs;
  return Stage2Mode::kMgs;
}

struct Unit {
  std::size_t rep;
  std::size_t alpha_index;
};

// Inputs shared by every cell of one repetition.
struct RepInputs {
  NodeSet x;
  ProfileMap profiles;
  double b1_share = 0.0;
  double b2_share = 0.0;
};

class CellRunner {
 public:
  CellRunner(const ExperimentConfig& cfg, const Graph& g, const RRIndex& idx,
             std::size_t theta, const World& world, const RepInputs& in,
             unsigned workers)
      : cfg_(cfg),
        g_(g),
        idx_(idx),
        theta_(theta),
        world_(world),
        in_(in),
        workers_(workers) {}

  // Fills spread fields and traces; trace files go to `trace_path` if set.
  void run(CellRun& run, std::uint64_t opt_seed, std::uint64_t eval_seed,
           const fs::path& trace_path) const {
    using Clock = std::chrono::steady_clock;
    const std::string& alg = run.algorithm;
    Rng rng = make_stream(opt_seed, 0);
    auto start = Clock::now();
    auto stop_clock = [&] {
      run.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start)
                        .count();
    };
    std::vector<json> lines;

    if (alg == "RF" || alg == "2CD") {
      TwoStageOutcome out;
      if (alg == "RF") {
        out = baseline_rf(g_, in_.x, run.b1, run.b2, rng);
      } else {
        TwoStageConfig tc;
        tc.stage1.max_iters = cfg_.two_stage_iters;
        tc.stage2.max_iters = cfg_.two_stage_iters;
        tc.samples = cfg_.f_samples;
        out = two_stage_cd(g_, in_.x, run.b1, run.b2, tc, idx_, in_.profiles, rng);
        run.traces.push_back({"stage1", out.stage1_trace, out.stage1_steps});
        run.traces.push_back({"stage2", out.stage2_trace, out.stage2_steps});
        lines.push_back(trace_json("stage1", out.c1, out.stage1_trace,
                                   out.stage1_steps, g_));
        lines.push_back(trace_json("stage2", out.c2, out.stage2_trace,
                                   out.stage2_steps, g_));
      }
      stop_clock();
      auto est = spread_under_allocation(g_, out.c2, in_.profiles, cfg_.mc_runs,
                                         eval_seed, workers_);
      run.spread = est.mean;
      run.std_error = est.std_error;
    } else if (alg == "CD") {
      CDConfig cc;
      cc.max_iters = cfg_.cd_iters;
      auto res = baseline_cd_one_stage(g_, in_.x, run.budget, cc, idx_,
                                       in_.profiles, rng);
      stop_clock();
      run.traces.push_back({"cd", res.trace, res.steps});
      lines.push_back(trace_json("cd", res.allocation, res.trace, res.steps, g_));
      auto est = spread_under_allocation(g_, res.allocation, in_.profiles,
                                         cfg_.mc_runs, eval_seed, workers_);
      run.spread = est.mean;
      run.std_error = est.std_error;
    } else if (alg == "IM") {
      auto k = static_cast<std::size_t>(std::floor(run.budget + kBudgetTol));
      NodeSet seeds = baseline_im_greedy(in_.x, k, idx_);
      stop_clock();
      json seeds_j = json::array();
      for (NodeId u : seeds) seeds_j.push_back(g_.label(u));
      lines.push_back({{"stage", "im"}, {"budget", run.budget}, {"seeds", seeds_j}});
      auto est = monte_carlo_spread(g_, seeds, cfg_.mc_runs, eval_seed, workers_);
      run.spread = est.mean;
      run.std_error = est.std_error;
    } else {
      SeedingHistory hist;
      if (alg == "Ada") {
        hist = baseline_ada(g_, in_.x, in_.profiles, run.budget,
                            DiscountRateSet::uniform_grid(cfg_.rate_levels),
                            theta_, cfg_.residual_mode, world_, opt_seed, &idx_);
      } else {
        PolicyConfig pc;
        pc.b1 = run.b1;
        pc.b2 = run.b2;
        pc.rates = DiscountRateSet::uniform_grid(cfg_.rate_levels);
        pc.stage2_mode = stage2_mode_of(alg);
        pc.stage2_rates = DiscountRateSet(cfg_.stage2_rates);
        pc.delta_samples = cfg_.delta_samples;
        pc.theta = theta_;
        pc.residual_mode = cfg_.residual_mode;
        pc.stage2_cd.max_iters = cfg_.ada_cd_iters;
        PolicyContext ctx(g_, in_.x, in_.profiles, pc, opt_seed);
        hist = run_policy(ctx, world_, &idx_);
      }
      stop_clock();
      // One realized world per repetition: no sampling error within a run.
      run.spread = static_cast<double>(hist.influenced.size());
      run.std_error = 0.0;
      if (!trace_path.empty()) {
        fs::path p = trace_path;
        p += ".jsonl";
        std::ofstream out(p);
        write_trace_jsonl(hist, g_, out);
        run.trace_file = p.string();
      }
    }
    if (!cfg_.wall_time) run.wall_ms = 0.0;
    if (!trace_path.empty() && !lines.empty()) {
      fs::path p = trace_path;
      p += ".jsonl";
      std::ofstream out(p);
      for (const auto& l : lines) out << l.dump() << '\n';
      run.trace_file = p.string();
    }
  }

 private:
  const ExperimentConfig& cfg_;
  const Graph& g_;
  const RRIndex& idx_;
  std::size_t theta_;
  const World& world_;
  const RepInputs& in_;
  unsigned workers_;
};

std::string cell_stem(const std::string& alg, double alpha, double b,
                      std::size_t rep) {
  return alg + "_a" + num(alpha) + "_B" + num(b) + "_r" + std::to_string(rep);
}

void write_rep_inputs(const fs::path& dir, std::size_t rep, const RepInputs& in,
                      const Graph& g) {
  std::ofstream xs(dir / ("accessible_r" + std::to_string(rep) + ".txt"));
  for (NodeId u : in.x) xs << g.label(u) << '\n';
  std::ofstream ps(dir / ("profiles_r" + std::to_string(rep) + ".csv"));
  ps << "label,kind\n";
  for (NodeId u = 0; u < in.profiles.size(); ++u) {
    ps << g.label(u) << ',' << in.profiles[u].name() << '\n';
  }
}

}  // namespace

Graph load_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset.empty()) {
    Rng rng = make_stream(cfg.seed, stream_tag("dataset"));
    return preferential_attachment(cfg.synthetic_n, cfg.synthetic_m, 1.0, rng);
  }
  if (!fs::exists(cfg.dataset)) throw DatasetError("no such dataset: " + cfg.dataset);
  if (!cfg.checksum.empty()) {
    std::string want = cfg.checksum;
    std::transform(want.begin(), want.end(), want.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    std::string got = sha256_file(cfg.dataset);
    if (got != want) {
      throw DatasetError("checksum mismatch for " + cfg.dataset + ": " + got);
    }
  }
  try {
    return load_edge_list_file(cfg.dataset, cfg.directed, 1.0);
  } catch (const ParseError& e) {
    throw DatasetError(cfg.dataset + ": " + e.what());
  }
}

NodeSet accessible_for_rep(const ExperimentConfig& cfg, const Graph& g,
                           std::size_t rep) {
  Rng rng = make_stream(derive(cfg.seed, "accessible", {rep}), 0);
  return sample_accessible(g, cfg.x_size, rng);
}

const CellSummary* RunReport::find(const std::string& algorithm, double alpha,
                                   double budget) const {
  for (const auto& c : cells) {
    if (c.algorithm == algorithm && c.alpha == alpha && c.budget == budget) {
      return &c;
    }
  }
  return nullptr;
}

RunReport run_experiment(const ExperimentConfig& cfg, const Graph& base) {
  cfg.validate();
  if (cfg.x_size > base.node_count()) throw ArgumentError("|X| exceeds node count");

  RunReport report;
  report.dataset = dataset_label(cfg);
  report.node_count = base.node_count();
  report.edge_count = base.edge_count();
  report.theta = cfg.theta == 0 ? default_theta(base.node_count()) : cfg.theta;

  fs::path out_dir = cfg.out_dir;
  fs::path trace_dir;
  if (!cfg.out_dir.empty()) {
    trace_dir = out_dir / "traces";
    fs::create_directories(trace_dir);
    fs::create_directories(out_dir / "inputs");
  }

  std::vector<RepInputs> reps(cfg.repetitions);
  for (std::size_t r = 0; r < cfg.repetitions; ++r) {
    reps[r].x = accessible_for_rep(cfg, base, r);
    Rng pr = make_stream(derive(cfg.seed, "profiles", {r}), 0);
    reps[r].profiles = assign_profiles(base.node_count(), cfg.mix, pr);
    if (cfg.split_heuristic) {
      std::tie(reps[r].b1_share, reps[r].b2_share) =
          budget_split_heuristic(base, reps[r].x);
    } else {
      double total = cfg.split_b1 + cfg.split_b2;
      reps[r].b1_share = cfg.split_b1 / total;
      reps[r].b2_share = cfg.split_b2 / total;
    }
    if (!cfg.out_dir.empty()) write_rep_inputs(out_dir / "inputs", r, reps[r], base);
  }

  std::vector<Graph> graphs;
  for (double a : cfg.alphas) graphs.push_back(with_in_degree_probabilities(base, a));

  std::vector<Unit> units;
  for (std::size_t r = 0; r < cfg.repetitions; ++r) {
    for (std::size_t a = 0; a < cfg.alphas.size(); ++a) units.push_back({r, a});
  }
  const std::size_t per_unit = cfg.budgets.size() * cfg.algorithms.size();
  std::vector<CellRun> runs(units.size() * per_unit);

  unsigned workers = cfg.workers == 0 ? default_workers() : cfg.workers;
  // Parallel over units; inner sampling then stays on one thread.
  unsigned inner = units.size() > 1 ? 1 : workers;
  for_each_chunk(units.size(), units.size() > 1 ? workers : 1, [&](std::size_t ui) {
    const Unit& unit = units[ui];
    const double alpha = cfg.alphas[unit.alpha_index];
    const Graph& g = graphs[unit.alpha_index];
    const RepInputs& in = reps[unit.rep];
    CellRun* slots = runs.data() + ui * per_unit;
    for (std::size_t bi = 0; bi < cfg.budgets.size(); ++bi) {
      for (std::size_t k = 0; k < cfg.algorithms.size(); ++k) {
        CellRun& run = slots[bi * cfg.algorithms.size() + k];
        run.algorithm = cfg.algorithms[k];
        run.alpha = alpha;
        run.budget = cfg.budgets[bi];
        run.b1 = run.budget * in.b1_share;
        run.b2 = run.budget * in.b2_share;
        run.rep = unit.rep;
        run.seed = cfg.seed;
      }
    }
    std::unique_ptr<RRIndex> idx;
    World world;
    try {
      idx = std::make_unique<RRIndex>(build_rr_index(
          g, report.theta, derive(cfg.seed, "rr", {unit.rep, key(alpha)}), inner));
      world = World(g, derive(cfg.seed, "world", {unit.rep, key(alpha)}));
    } catch (const std::exception& e) {
      for (std::size_t i = 0; i < per_unit; ++i) {
        slots[i].failed = true;
        slots[i].reason = e.what();
      }
      return;
    }
    CellRunner runner(cfg, g, *idx, report.theta, world, in, inner);
    for (std::size_t i = 0; i < per_unit; ++i) {
      CellRun& run = slots[i];
      std::initializer_list<std::uint64_t> keys{
          unit.rep, key(alpha), key(run.budget), stream_tag(run.algorithm)};
      fs::path trace_path;
      if (!trace_dir.empty()) {
        trace_path = trace_dir / cell_stem(run.algorithm, alpha, run.budget, unit.rep);
      }
      try {
        runner.run(run, derive(cfg.seed, "optimize", keys),
                   derive(cfg.seed, "evaluate", keys), trace_path);
      } catch (const std::exception& e) {
        run.failed = true;
        run.reason = e.what();
      }
    }
  });

  // Cells in configuration order: alpha, budget, algorithm.
  for (double alpha : cfg.alphas) {
    for (double b : cfg.budgets) {
      for (const auto& alg : cfg.algorithms) {
        CellSummary cell;
        cell.algorithm = alg;
        cell.alpha = alpha;
        cell.budget = b;
        std::vector<const CellRun*> ok;
        for (const auto& run : runs) {
          if (run.algorithm != alg || run.alpha != alpha || run.budget != b) continue;
          if (!run.trace_file.empty()) cell.trace_files.push_back(run.trace_file);
          if (run.failed) {
            if (!cell.failed) cell.reason = run.reason;
            cell.failed = true;
          } else {
            ok.push_back(&run);
          }
        }
        cell.reps = ok.size();
        if (!ok.empty()) {
          double sum = 0.0, wall = 0.0;
          for (const auto* r : ok) {
            sum += r->spread;
            wall += r->wall_ms;
          }
          double k = static_cast<double>(ok.size());
          cell.mean = sum / k;
          cell.wall_ms = wall / k;
          if (ok.size() > 1) {
            double ss = 0.0;
            for (const auto* r : ok) ss += (r->spread - cell.mean) * (r->spread - cell.mean);
            cell.std_error = std::sqrt(ss / (k - 1.0) / k);
          } else {
            cell.std_error = ok.front()->std_error;
          }
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }
  report.runs = std::move(runs);
  return report;
}

void write_csv(const RunReport& report, std::ostream& out) {
  out << "dataset,algorithm,alpha,B,B1,B2,rep,spread,stderr,wall_ms,seed\n";
  for (const auto& r : report.runs) {
    out << report.dataset << ',' << r.algorithm << ',' << num(r.alpha) << ','
        << num(r.budget) << ',' << num(r.b1) << ',' << num(r.b2) << ',' << r.rep
        << ',';
    if (r.failed) {
      out << "nan,nan,";
    } else {
      out << num(r.spread) << ',' << num(r.std_error) << ',';
    }
    out << std::fixed << std::setprecision(3) << r.wall_ms << std::defaultfloat
        << ',' << r.seed << '\n';
  }
}

void write_json(const RunReport& report, const ExperimentConfig& cfg,
                std::ostream& out) {
  json cells = json::array();
  for (const auto& c : report.cells) {
    json cj = {{"algorithm", c.algorithm}, {"alpha", c.alpha},
               {"B", c.budget},           {"mean_spread", c.mean},
               {"stderr", c.std_error},   {"wall_ms", c.wall_ms},
               {"repetitions", c.reps},   {"failed", c.failed},
               {"traces", c.trace_files}};
    if (c.failed) cj["reason"] = c.reason;
    cells.push_back(std::move(cj));
  }
  json config = {
      {"dataset", cfg.dataset.empty() ? "synthetic" : cfg.dataset},
      {"directed", cfg.directed},
      {"alphas", cfg.alphas},
      {"x_size", cfg.x_size},
      {"budgets", cfg.budgets},
      {"split", cfg.split_heuristic ? json("heuristic")
                                    : json::array({cfg.split_b1, cfg.split_b2})},
      {"theta", report.theta},
      {"profile_mix", json::parse(cfg.mix.to_json())},
      {"algorithms", cfg.algorithms},
      {"seed", cfg.seed},
      {"repetitions", cfg.repetitions},
      {"mc_runs", cfg.mc_runs},
      {"f_samples", cfg.f_samples},
      {"cd_iters", cfg.cd_iters},
      {"two_stage_iters", cfg.two_stage_iters},
      {"ada_cd_iters", cfg.ada_cd_iters},
      {"rate_levels", cfg.rate_levels},
      {"stage2_rates", cfg.stage2_rates},
      {"residual", cfg.residual_mode == ResidualMode::kRebuild ? "rebuild" : "filter"},
      {"delta_samples", cfg.delta_samples}};
  if (cfg.dataset.empty()) {
    config["synthetic"] = {{"n", cfg.synthetic_n}, {"m", cfg.synthetic_m}};
  }
  json doc = {{"dataset", report.dataset},
              {"nodes", report.node_count},
              {"edges", report.edge_count},
              {"config", config},
              {"cells", cells}};
  out << doc.dump(2) << '\n';
}

void write_reports(const RunReport& report, const ExperimentConfig& cfg) {
  if (cfg.out_dir.empty()) return;
  fs::create_directories(cfg.out_dir);
  std::ofstream csv(fs::path(cfg.out_dir) / "results.csv");
  write_csv(report, csv);
  std::ofstream js(fs::path(cfg.out_dir) / "report.json");
  write_json(report, cfg, js);
}

std::vector<FpTrial> fp_check(const Graph& g, std::size_t x_size,
                              std::size_t trials, std::uint64_t seed,
                              DegreeKind kind) {
  std::vector<FpTrial> out;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = make_stream(derive(seed, "fp-check", {t}), 0);
    NodeSet x = sample_accessible(g, x_size, rng);
    out.push_back({t, fp_statistics(g, x, kind)});
  }
  return out;
}

std::pair<double, double> budget_split_heuristic(const Graph& g,
                                                 const NodeSet& x,
                                                 std::string* warning) {
  if (x.empty()) throw ArgumentError("budget split: empty X");
  if (neighborhood(g, x).empty()) {
    if (warning) *warning = "N(X) is empty; the whole budget goes to stage 1";
    return {1.0, 0.0};
  }
  FpStatistics st = fp_statistics(g, x);
  double total = st.avg_deg_x + st.avg_deg_nx;
  if (total <= 0.0) return {0.5, 0.5};
  return {st.avg_deg_x / total, st.avg_deg_nx / total};
}

EstimateReport estimate_side_by_side(const Graph& g, const ProfileMap& profiles,
                                     const NodeSet& seeds,
                                     const DiscountAllocation& alloc,
                                     std::size_t theta, std::size_t mc_runs,
                                     std::uint64_t seed) {
  EstimateReport rep;
  RRIndex idx = build_rr_index(g, theta, derive(seed, "rr", {}));
  bool use_alloc = !alloc.empty();
  std::uint64_t mc_seed = derive(seed, "evaluate", {});
  SpreadEstimate mc;
  if (use_alloc) {
    rep.rr = estimate_alloc_influence(idx, alloc, profiles);
    mc = spread_under_allocation(g, alloc, profiles, mc_runs, mc_seed);
  } else {
    rep.rr = estimate_influence(idx, seeds);
    mc = monte_carlo_spread(g, seeds, mc_runs, mc_seed);
  }
  rep.mc = mc.mean;
  rep.mc_std_error = mc.std_error;
  if (g.node_count() <= kMaxExactNodes && g.edge_count() <= kMaxExactEdges) {
    ExactInstance inst{g, profiles};
    rep.exact = use_alloc ? exact_Q(inst, alloc) : exact_influence(inst, seeds);
  }
  return rep;
}

}  // namespace fpim
