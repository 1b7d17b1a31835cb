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

// fpim: experiment harness for two-stage and adaptive discount seeding.
//
// Exit codes: 0 success, 2 configuration error, 3 dataset error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "fpim/experiment.hpp"
#include "fpim/random.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kDatasetError = 3;

struct Options {
  fpim::ExperimentConfig cfg;
  std::string split = "1:4";
  std::string mix = "setting1";
  std::string residual = "rebuild";
  bool no_wall_time = false;
};

void add_dataset_options(CLI::App* sub, Options& o) {
  auto& c = o.cfg;
  sub->add_option("--dataset", c.dataset,
                  "SNAP-style edge list; omit for the synthetic graph");
  sub->add_option("--name", c.dataset_name, "dataset label in reports");
  sub->add_option("--checksum", c.checksum, "expected SHA-256 of the dataset");
  sub->add_flag("--directed", c.directed, "treat edges as directed");
  sub->add_option("--synthetic-n", c.synthetic_n, "preferential-attachment nodes")
      ->capture_default_str();
  sub->add_option("--synthetic-m", c.synthetic_m, "edges per new node")
      ->capture_default_str();
  sub->add_option("--seed", c.seed, "master seed")->capture_default_str();
  sub->add_option("--workers", c.workers, "worker threads (0 = all cores)")
      ->envname("FPIM_WORKERS");
}

void add_model_options(CLI::App* sub, Options& o) {
  auto& c = o.cfg;
  sub->add_option("--alpha", c.alphas, "propagation scale(s)")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--mix", o.mix,
                  "profile mix: setting1, setting2, or a JSON file/string")
      ->capture_default_str();
  sub->add_option("--theta", c.theta, "RR sets (0 = max(1e4, 20 n ln n))")
      ->capture_default_str();
  sub->add_option("--mc-runs", c.mc_runs, "evaluation Monte Carlo runs")
      ->capture_default_str();
}

void add_run_options(CLI::App* sub, Options& o) {
  auto& c = o.cfg;
  sub->add_option("--x-size", c.x_size, "|X|")->capture_default_str();
  sub->add_option("--budgets", c.budgets, "total budgets B")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--split", o.split, "B1:B2 ratio")->capture_default_str();
  sub->add_flag("--split-heuristic", c.split_heuristic,
                "split B by the average degrees of X and N(X)");
  sub->add_option("--algorithms", c.algorithms,
                  "roster: RF,IM,CD,2CD,Ada,Ada+CD,Ada+GS,Ada+MGS")
      ->delimiter(',');
  sub->add_option("--repetitions", c.repetitions, "repetitions per cell")
      ->capture_default_str();
  sub->add_option("--f-samples", c.f_samples, "agent-set samples per f estimate")
      ->capture_default_str();
  sub->add_option("--cd-iters", c.cd_iters, "sweeps for one-stage CD")
      ->capture_default_str();
  sub->add_option("--two-stage-iters", c.two_stage_iters, "sweeps per 2CD stage")
      ->capture_default_str();
  sub->add_option("--ada-cd-iters", c.ada_cd_iters, "sweeps for Ada+CD stage 2")
      ->capture_default_str();
  sub->add_option("--rate-levels", c.rate_levels, "stage-1 rates 1/k..1")
      ->capture_default_str();
  sub->add_option("--stage2-rates", c.stage2_rates, "GS/MGS discount rates")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--residual", o.residual, "rebuild or filter")
      ->check(CLI::IsMember({"rebuild", "filter"}))
      ->capture_default_str();
  sub->add_option("--delta-samples", c.delta_samples, "residual indexes averaged")
      ->capture_default_str();
  sub->add_option("--out", c.out_dir, "output directory for reports and traces");
  sub->add_flag("--no-wall-time", o.no_wall_time,
                "write wall_ms = 0 for byte-stable CSVs");
}

fpim::ProfileMix parse_mix(const std::string& arg) {
  if (arg == "setting1") return fpim::ProfileMix::setting1();
  if (arg == "setting2") return fpim::ProfileMix::setting2();
  std::ifstream in(arg);
  if (in) {
    std::stringstream ss;
    ss << in.rdbuf();
    return fpim::ProfileMix::from_json(ss.str());
  }
  return fpim::ProfileMix::from_json(arg);
}

void finish(Options& o) {
  auto& c = o.cfg;
  c.mix = parse_mix(o.mix);
  c.residual_mode =
      o.residual == "filter" ? fpim::ResidualMode::kFilter : fpim::ResidualMode::kRebuild;
  c.wall_time = !o.no_wall_time;
  auto colon = o.split.find(':');
  if (colon == std::string::npos) throw fpim::ArgumentError("--split must be B1:B2");
  try {
    c.split_b1 = std::stod(o.split.substr(0, colon));
    c.split_b2 = std::stod(o.split.substr(colon + 1));
  } catch (const std::exception&) {
    throw fpim::ArgumentError("--split must be B1:B2");
  }
}

std::unordered_map<std::uint64_t, fpim::NodeId> label_index(const fpim::Graph& g) {
  std::unordered_map<std::uint64_t, fpim::NodeId> ids;
  for (fpim::NodeId u = 0; u < g.node_count(); ++u) ids[g.label(u)] = u;
  return ids;
}

fpim::NodeId lookup(const std::unordered_map<std::uint64_t, fpim::NodeId>& ids,
                    const std::string& label) {
  std::uint64_t key = 0;
  try {
    key = std::stoull(label);
  } catch (const std::exception&) {
    throw fpim::ArgumentError("bad node label: " + label);
  }
  auto it = ids.find(key);
  if (it == ids.end()) throw fpim::ArgumentError("unknown node label: " + label);
  return it->second;
}

int cmd_fp_check(Options& o, std::size_t trials, const std::string& kind) {
  fpim::Graph g = fpim::load_dataset(o.cfg);
  auto dk = kind == "in"    ? fpim::DegreeKind::kIn
            : kind == "out" ? fpim::DegreeKind::kOut
                            : fpim::DegreeKind::kTotal;
  auto rows = fpim::fp_check(g, o.cfg.x_size, trials, o.cfg.seed, dk);
  std::size_t holds = 0;
  std::cout << "trial,avg_deg_x,avg_deg_nx\n";
  for (const auto& r : rows) {
    std::cout << r.trial << ',' << r.stats.avg_deg_x << ',' << r.stats.avg_deg_nx
              << '\n';
    holds += r.stats.paradox_holds ? 1 : 0;
  }
  std::cout << "# paradox frequency: " << holds << '/' << rows.size() << '\n';
  return 0;
}

int cmd_estimate(Options& o, const std::string& seeds_file,
                 const std::string& alloc_file) {
  if (seeds_file.empty() == alloc_file.empty()) {
    throw fpim::ArgumentError("give exactly one of --seeds or --alloc");
  }
  fpim::Graph base = fpim::load_dataset(o.cfg);
  fpim::Graph g = fpim::with_in_degree_probabilities(base, o.cfg.alphas.front());
  fpim::Rng rng = fpim::make_stream(o.cfg.seed, fpim::stream_tag("profiles"));
  fpim::ProfileMap profiles = fpim::assign_profiles(g.node_count(), o.cfg.mix, rng);
  auto ids = label_index(g);

  fpim::NodeSet seeds;
  fpim::DiscountAllocation alloc;
  if (!seeds_file.empty()) {
    std::ifstream in(seeds_file);
    std::string tok;
    while (in >> tok) seeds.insert(lookup(ids, tok));
  } else {
    std::ifstream in(alloc_file);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw fpim::ArgumentError(alloc_file + ": " + e.what());
    }
    if (!j.is_object()) throw fpim::ArgumentError("allocation must be a JSON object");
    double total = 0.0;
    for (auto& [label, c] : j.items()) {
      alloc.set(lookup(ids, label), c.get<double>());
      total += c.get<double>();
    }
    alloc.set_budget(total);
  }
  std::size_t theta =
      o.cfg.theta == 0 ? fpim::default_theta(g.node_count()) : o.cfg.theta;
  auto rep = fpim::estimate_side_by_side(g, profiles, seeds, alloc, theta,
                                         o.cfg.mc_runs, o.cfg.seed);
  std::cout << "rr_estimate,mc_estimate,mc_stderr,exact\n"
            << rep.rr << ',' << rep.mc << ',' << rep.mc_std_error << ',';
  if (rep.exact) {
    std::cout << *rep.exact << '\n';
  } else {
    std::cout << "n/a\n";
  }
  return 0;
}

int cmd_run(Options& o) {
  fpim::Graph g = fpim::load_dataset(o.cfg);
  fpim::RunReport report = fpim::run_experiment(o.cfg, g);
  if (o.cfg.out_dir.empty()) {
    fpim::write_csv(report, std::cout);
  } else {
    fpim::write_reports(report, o.cfg);
    std::cout << "algorithm,alpha,B,mean_spread,stderr,reps,status\n";
    for (const auto& c : report.cells) {
      std::cout << c.algorithm << ',' << c.alpha << ',' << c.budget << ','
                << c.mean << ',' << c.std_error << ',' << c.reps << ','
                << (c.failed ? "failed: " + c.reason : "ok") << '\n';
    }
  }
  bool any_failed = false;
  for (const auto& c : report.cells) any_failed = any_failed || c.failed;
  return any_failed ? 1 : 0;
}

int cmd_split(Options& o) {
  fpim::Graph g = fpim::load_dataset(o.cfg);
  fpim::NodeSet x = fpim::accessible_for_rep(o.cfg, g, 0);
  std::string warning;
  auto [b1, b2] = fpim::budget_split_heuristic(g, x, &warning);
  if (!warning.empty()) std::cerr << "warning: " << warning << '\n';
  std::cout << "b1_share,b2_share\n" << b1 << ',' << b2 << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage and adaptive discount seeding experiments"};
  app.require_subcommand(1);
  Options o;

  auto* fp = app.add_subcommand("fp-check", "friendship-paradox statistics of sampled X");
  add_dataset_options(fp, o);
  fp->add_option("--x-size", o.cfg.x_size, "|X|")->capture_default_str();
  std::size_t trials = 100;
  fp->add_option("--trials", trials, "sampled X sets")->capture_default_str();
  std::string degree_kind = "total";
  fp->add_option("--degree", degree_kind, "total, in or out")
      ->check(CLI::IsMember({"total", "in", "out"}))
      ->capture_default_str();

  auto* est = app.add_subcommand("estimate", "RR, Monte Carlo and exact influence");
  add_dataset_options(est, o);
  add_model_options(est, o);
  std::string seeds_file, alloc_file;
  est->add_option("--seeds", seeds_file, "file of seed labels")
      ->check(CLI::ExistingFile);
  est->add_option("--alloc", alloc_file, "JSON object {label: discount}")
      ->check(CLI::ExistingFile);

  auto* run = app.add_subcommand("run", "run the experiment matrix");
  add_dataset_options(run, o);
  add_model_options(run, o);
  add_run_options(run, o);

  auto* split = app.add_subcommand("split-heuristic", "B1/B2 shares by average degrees");
  add_dataset_options(split, o);
  split->add_option("--x-size", o.cfg.x_size, "|X|")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    finish(o);
    if (*fp) return cmd_fp_check(o, trials, degree_kind);
    if (*est) return cmd_estimate(o, seeds_file, alloc_file);
    o.cfg.validate();
    if (*run) return cmd_run(o);
    return cmd_split(o);
  } catch (const fpim::DatasetError& e) {
    std::cerr << "dataset error: " << e.what() << '\n';
    return kDatasetError;
  } catch (const fpim::ArgumentError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const fpim::CapacityError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
