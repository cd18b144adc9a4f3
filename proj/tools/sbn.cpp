//------------------------------------------------------------------------------
//
//   Copyright 2026 The sbn Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include "sbn/graph.hpp"
#include "sbn/io.hpp"
#include "sbn/rates_alloc.hpp"
#include "sbn/signal_model.hpp"
#include "sbn/simulator.hpp"
#include "sbn/verify.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using sbn::io::json;

constexpr int kExitFailure = 1;

void print_error(std::string const &message, json extra = json::object())
{
  extra["error"] = message;
  std::cerr << extra.dump(2) << '\n';
}

void write_json(json const &doc, std::string const &path)
{
  if (path.empty() || path == "-")
  {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out)
  {
    throw sbn::Error("cannot write " + path);
  }
  out << doc.dump(2) << '\n';
}

json violations_json(std::vector<sbn::Violation> const &violations)
{
  json out = json::array();
  for (auto const &v : violations)
  {
    out.push_back(sbn::io::violation_to_json(v));
  }
  return out;
}

json nullable(std::optional<sbn::Vertex> v)
{
  return v ? json(*v) : json(nullptr);
}

/// a^(d(i, j) + 1) for every ordered pair; null when j is unreachable from i.
json attenuation_json(sbn::DistanceMatrix const &dist, std::uint64_t a)
{
  json rows = json::array();
  for (sbn::Vertex i = 0; i < dist.size(); ++i)
  {
    json row = json::array();
    for (sbn::Vertex j = 0; j < dist.size(); ++j)
    {
      auto const d = dist.at(i, j);
      row.push_back(d ? json(sbn::detail::int_power(a, *d + 1)) : json(nullptr));
    }
    rows.push_back(row);
  }
  return rows;
}

struct ConfigOptions
{
  std::string                  config_path;
  bool                         dump_normalized = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> horizon;
  std::optional<std::uint64_t> stride;
};

void add_config_options(CLI::App &cmd, ConfigOptions &opts, bool simulation_overrides)
{
  cmd.add_option("--config", opts.config_path, "Experiment config JSON")->required()->check(CLI::ExistingFile);
  cmd.add_flag("--dump-normalized", opts.dump_normalized,
               "Print the normalized config (after overrides) and exit");
  if (simulation_overrides)
  {
    cmd.add_option("--seed", opts.seed, "Override simulation.seed");
    cmd.add_option("--horizon", opts.horizon, "Override simulation.horizon")->check(CLI::PositiveNumber);
    cmd.add_option("--stride", opts.stride, "Override simulation.record_stride")->check(CLI::PositiveNumber);
  }
}

sbn::io::ExperimentConfig load(ConfigOptions const &opts)
{
  auto cfg = sbn::io::load_config(opts.config_path);
  if (opts.seed)
  {
    cfg.simulation.seed = *opts.seed;
  }
  if (opts.horizon)
  {
    cfg.simulation.horizon = *opts.horizon;
  }
  if (opts.stride)
  {
    cfg.simulation.record_stride = *opts.stride;
  }
  return cfg;
}

int cmd_simulate(ConfigOptions const &opts, std::string const &out_dir)
{
  auto const cfg = load(opts);
  if (opts.dump_normalized)
  {
    std::cout << sbn::io::config_to_json(cfg).dump(2) << '\n';
    return 0;
  }
  auto const sim    = sbn::io::to_simulation_config(cfg);
  auto const result = sbn::run(sim);

  std::filesystem::create_directories(out_dir);
  auto const base = std::filesystem::path(out_dir);
  {
    std::ofstream out(base / "trajectory.csv");
    sbn::io::write_trajectory_csv(out, result.protocol);
  }
  {
    std::ofstream out(base / "rates.csv");
    sbn::io::write_rate_csv(out, result.protocol, result.baseline ? &*result.baseline : nullptr);
  }

  auto const dist  = sbn::shortest_path_matrix(cfg.graph);
  auto const kl    = sbn::relative_entropy_table(cfg.model);
  auto const truth = cfg.model.true_state;
  auto const &traj = result.protocol;
  auto const  last = traj.records() - 1;

  json rates    = json::array();
  bool all_meet = true;
  for (sbn::Vertex i = 0; i < cfg.graph.size(); ++i)
  {
    for (sbn::Hypothesis q = 0; q < cfg.model.hypothesis_count(); ++q)
    {
      if (q == truth)
      {
        continue;
      }
      auto const bound = sbn::theoretical_rate_bound(kl, dist, cfg.a, i, truth, q);
      json       row   = {{"agent", i},
                          {"false_hypothesis", cfg.model.hypotheses.label(q)},
                          {"bound", bound.value},
                          {"bound_source", nullable(bound.source)},
                          {"final_rate", -traj.mu(last, i, q) / static_cast<double>(traj.times[last])}};
      try
      {
        double const empirical = sbn::empirical_asymptotic_rate(traj, i, q);
        bool const   meets     = empirical >= 0.9 * bound.value;
        all_meet               = all_meet && meets;
        row["empirical_rate"]  = empirical;
        row["meets_0_9_bound"] = meets;
      }
      catch (sbn::Error const &e)
      {
        all_meet               = false;
        row["empirical_rate"]  = nullptr;
        row["note"]            = e.what();
      }
      if (result.baseline)
      {
        try
        {
          row["baseline_empirical_rate"] = sbn::empirical_asymptotic_rate(*result.baseline, i, q);
        }
        catch (sbn::Error const &e)
        {
          row["baseline_empirical_rate"] = nullptr;
        }
      }
      rates.push_back(row);
    }
  }

  json final_true = json::array();
  for (sbn::Vertex i = 0; i < cfg.graph.size(); ++i)
  {
    final_true.push_back(std::exp(traj.mu(last, i, truth)));
  }

  json summary = {
      {"a", cfg.a},
      {"horizon", cfg.simulation.horizon},
      {"seed", cfg.simulation.seed},
      {"record_stride", cfg.simulation.record_stride},
      {"records", traj.records()},
      {"true_state", cfg.model.hypotheses.label(truth)},
      {"strongly_connected", result.strongly_connected},
      {"rate_bounds_guaranteed", result.strongly_connected},
      {"warnings", result.warnings},
      {"attenuation_factors", attenuation_json(dist, cfg.a)},
      {"final_true_state_belief", final_true},
      {"rates", rates},
      {"all_rates_meet_0_9_bound", all_meet},
  };
  if (result.baseline)
  {
    auto const nu   = sbn::eigenvector_centrality(cfg.graph, *sim.baseline);
    json       base = json::array();
    for (sbn::Hypothesis q = 0; q < cfg.model.hypothesis_count(); ++q)
    {
      if (q != truth)
      {
        base.push_back({{"false_hypothesis", cfg.model.hypotheses.label(q)},
                        {"averaging_rate", sbn::baseline_averaging_rate(kl, nu, truth, q)}});
      }
    }
    summary["baseline"] = {{"eigenvector_centrality", nu}, {"analytic_rates", base}};
  }
  for (auto const &w : result.warnings)
  {
    std::cerr << "warning: " << w << '\n';
  }
  write_json(summary, (base / "summary.json").string());
  return 0;
}

int cmd_rates(ConfigOptions const &opts, std::string const &out_path)
{
  auto const cfg = load(opts);
  if (opts.dump_normalized)
  {
    std::cout << sbn::io::config_to_json(cfg).dump(2) << '\n';
    return 0;
  }
  auto const violations = sbn::validate_model(cfg.model);
  for (auto const &v : violations)
  {
    if (v.kind != sbn::ViolationKind::EmptySourceSet)
    {
      print_error("model validation failed", {{"violations", violations_json(violations)}});
      return kExitFailure;
    }
  }
  auto const  dist      = sbn::shortest_path_matrix(cfg.graph);
  auto const  kl        = sbn::relative_entropy_table(cfg.model);
  bool const  connected = dist.all_reachable();
  auto const  m         = cfg.model.hypothesis_count();
  auto const &labels    = cfg.model.hypotheses;

  json kl_json = json::array();
  for (sbn::Vertex i = 0; i < cfg.graph.size(); ++i)
  {
    json agent = json::array();
    for (sbn::Hypothesis p = 0; p < m; ++p)
    {
      json row = json::array();
      for (sbn::Hypothesis q = 0; q < m; ++q)
      {
        row.push_back(kl(i, p, q));
      }
      agent.push_back(row);
    }
    kl_json.push_back(agent);
  }

  json pairs = json::array();
  for (sbn::Hypothesis p = 0; p < m; ++p)
  {
    for (sbn::Hypothesis q = 0; q < m; ++q)
    {
      if (p == q)
      {
        continue;
      }
      auto const sources = sbn::source_set(kl, p, q);
      json       bounds  = json::array();
      json       groups  = json::object();
      for (sbn::Vertex i = 0; i < cfg.graph.size(); ++i)
      {
        auto const b = sbn::theoretical_rate_bound(kl, dist, cfg.a, i, p, q);
        bounds.push_back({{"agent", i}, {"bound", b.value}, {"source", nullable(b.source)}});
        if (b.source)
        {
          groups[std::to_string(*b.source)].push_back(i);
        }
      }
      json pair = {{"true_state", labels.label(p)},
                   {"false_hypothesis", labels.label(q)},
                   {"source_set", sources},
                   {"empty_source_set", sources.empty()},
                   {"groups_by_source", groups}};
      if (cfg.a == 1)
      {
        pair["rate"] = sbn::theoretical_rate_bound(kl, dist, 1, 0, p, q).value;
      }
      else
      {
        pair["bounds"] = bounds;
      }
      pairs.push_back(pair);
    }
  }

  json report = {{"a", cfg.a},
                 {"strongly_connected", connected},
                 {"rate_bounds_guaranteed", connected && violations.empty()},
                 {"kl_divergence", kl_json},
                 {"pairs", pairs},
                 {"violations", violations_json(violations)}};
  if (connected)
  {
    report["diameter"] = sbn::diameter(dist);
    report["attenuation_factors"] = attenuation_json(dist, cfg.a);
  }
  if (cfg.a == 1 && connected)
  {
    auto const weights = sbn::io::baseline_weights(cfg).value_or(sbn::lazy_metropolis_weights(cfg.graph));
    auto const nu      = sbn::eigenvector_centrality(cfg.graph, weights);
    json       cmp     = json::array();
    for (sbn::Hypothesis p = 0; p < m; ++p)
    {
      for (sbn::Hypothesis q = 0; q < m; ++q)
      {
        if (p != q)
        {
          cmp.push_back({{"true_state", labels.label(p)},
                         {"false_hypothesis", labels.label(q)},
                         {"min_rule_rate", sbn::theoretical_rate_bound(kl, dist, 1, 0, p, q).value},
                         {"averaging_rate", sbn::baseline_averaging_rate(kl, nu, p, q)}});
        }
      }
    }
    report["baseline"] = {{"eigenvector_centrality", nu}, {"comparison", cmp}};
  }
  write_json(report, out_path);
  return 0;
}

json score_json(sbn::AllocationScore const &score)
{
  json pairs = json::array();
  for (auto const &p : score.pairs)
  {
    pairs.push_back({{"p", p.p}, {"q", p.q}, {"min", p.min_rate}, {"avg", p.avg_rate}});
  }
  return pairs;
}

json per_agent_bounds(sbn::io::ExperimentConfig const &cfg, sbn::Allocation const &psi)
{
  auto const allocated = sbn::apply_allocation(cfg.model, psi);
  auto const kl        = sbn::relative_entropy_table(allocated);
  auto const dist      = sbn::shortest_path_matrix(cfg.graph);
  auto const m         = cfg.model.hypothesis_count();
  json       out       = json::array();
  for (sbn::Vertex i = 0; i < cfg.graph.size(); ++i)
  {
    for (sbn::Hypothesis p = 0; p < m; ++p)
    {
      for (sbn::Hypothesis q = 0; q < m; ++q)
      {
        if (p != q)
        {
          auto const b = sbn::theoretical_rate_bound(kl, dist, cfg.a, i, p, q);
          out.push_back({{"agent", i}, {"p", p}, {"q", q}, {"bound", b.value}, {"source", nullable(b.source)}});
        }
      }
    }
  }
  return out;
}

int cmd_allocate(ConfigOptions const &opts, std::string const &metric_name, std::string const &method,
                 std::string const &out_path)
{
  auto const cfg = load(opts);
  if (opts.dump_normalized)
  {
    std::cout << sbn::io::config_to_json(cfg).dump(2) << '\n';
    return 0;
  }
  auto const violations = sbn::validate_model(cfg.model);
  for (auto const &v : violations)
  {
    if (v.kind != sbn::ViolationKind::EmptySourceSet)
    {
      print_error("model validation failed", {{"violations", violations_json(violations)}});
      return kExitFailure;
    }
  }
  auto const metric     = metric_name == "min" ? sbn::Metric::Min : sbn::Metric::Avg;
  auto const &structures = cfg.model.structures;
  auto const dist       = sbn::shortest_path_matrix(cfg.graph);
  if (!dist.all_reachable())
  {
    print_error("graph is not strongly connected; allocation analysis requires it");
    return kExitFailure;
  }
  auto const diam = sbn::diameter(dist);

  json report = {{"metric", metric_name},
                 {"method", method},
                 {"bound_a_pow_diam", sbn::detail::int_power(cfg.a, diam)},
                 {"dominant_structure", nullptr}};
  std::optional<std::size_t> dominant;
  if (cfg.a > 1)
  {
    dominant = sbn::dominance_check(structures, cfg.a, diam);
    if (dominant)
    {
      report["dominant_structure"] = *dominant;
    }
  }

  std::optional<sbn::Allocation>      chosen;
  std::optional<sbn::AllocationScore> chosen_score;
  if (method == "centrality" || method == "both")
  {
    if (!dominant)
    {
      json diag = {{"dominant_structure", nullptr},
                   {"suggestion", "no dominant structure exists; use --method brute"}};
      if (method == "centrality")
      {
        print_error(cfg.a > 1 ? "no dominant signal structure" : "centrality allocation requires a > 1", diag);
        return kExitFailure;
      }
      report["centrality"] = {{"error", cfg.a > 1 ? "no dominant signal structure" : "requires a > 1"},
                              {"suggestion", "use --method brute"}};
    }
    else
    {
      auto psi   = sbn::centrality_optimal_allocation(structures, cfg.graph, cfg.a, metric);
      auto score = sbn::rho_metrics(structures, cfg.graph, cfg.a, psi);
      report["centrality"] = {{"psi", psi.psi()}, {"rho_min", score.rho_min}, {"rho_avg", score.rho_avg}};
      chosen       = psi;
      chosen_score = score;
    }
  }
  if (method == "brute" || method == "both")
  {
    if (cfg.graph.size() > sbn::kMaxBruteForceSize)
    {
      print_error("brute force refuses n = " + std::to_string(cfg.graph.size()) + " (limit " +
                  std::to_string(sbn::kMaxBruteForceSize) + ")");
      return kExitFailure;
    }
    auto const brute = sbn::brute_force_allocation(structures, cfg.graph, cfg.a, metric, sbn::worker_threads());
    report["brute"]  = {{"psi", brute.psi.psi()}, {"rho_min", brute.score.rho_min}, {"rho_avg", brute.score.rho_avg}};
    if (chosen_score)
    {
      bool const agree = chosen_score->value(metric) == brute.score.value(metric);
      report["agreement"] = agree;
      if (!agree)
      {
        write_json(report, out_path);
        print_error("centrality and brute-force scores disagree on a dominant instance");
        return kExitFailure;
      }
    }
    else
    {
      chosen       = brute.psi;
      chosen_score = brute.score;
    }
  }
  report["psi"]              = chosen->psi();
  report["rho_min"]          = chosen_score->rho_min;
  report["rho_avg"]          = chosen_score->rho_avg;
  report["pairs"]            = score_json(*chosen_score);
  report["per_agent_bounds"] = per_agent_bounds(cfg, *chosen);
  write_json(report, out_path);
  return 0;
}

int cmd_verify(std::string const &suite, std::size_t seeds)
{
  sbn::verify::Options options;
  options.seeds = seeds;
  auto const reports = sbn::verify::run_suites(suite, options);
  bool       ok      = true;
  for (auto const &r : reports)
  {
    std::cout << "suite " << r.name << ": " << (r.passed ? "PASS" : "FAIL") << " (checks=" << r.checks
              << ", seeds=" << r.seeds << ", " << r.seconds << " s)";
    if (!r.passed)
    {
      std::cout << " first failure: " << r.first_failure;
    }
    std::cout << '\n';
    ok = ok && r.passed;
  }
  return ok ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Time-triggered min-protocol learning: simulation, rate bounds and allocation analysis"};
  app.require_subcommand(1);

  ConfigOptions sim_opts;
  std::string   out_dir = "out";
  auto *simulate = app.add_subcommand("simulate", "Run the protocol and write trajectory CSVs and a summary");
  add_config_options(*simulate, sim_opts, true);
  simulate->add_option("--out", out_dir, "Output directory");

  ConfigOptions rates_opts;
  std::string   rates_out;
  auto *rates = app.add_subcommand("rates", "Print the theoretical rate-bound table");
  add_config_options(*rates, rates_opts, false);
  rates->add_option("--out", rates_out, "Write the report to a file instead of stdout");

  ConfigOptions alloc_opts;
  std::string   metric = "min";
  std::string   method = "centrality";
  std::string   alloc_out;
  auto *allocate = app.add_subcommand("allocate", "Optimize the allocation of signal structures to agents");
  add_config_options(*allocate, alloc_opts, false);
  allocate->add_option("--metric", metric, "Objective")->check(CLI::IsMember({"min", "avg"}));
  allocate->add_option("--method", method, "Optimizer")->check(CLI::IsMember({"centrality", "brute", "both"}));
  allocate->add_option("--out", alloc_out, "Write the report to a file instead of stdout");

  std::string suite = "all";
  std::size_t seeds = 5;
  auto *verify = app.add_subcommand("verify", "Run the property suites");
  verify->add_option("--suite", suite, "Suite name")
      ->check(CLI::IsMember({"schedule", "protocol", "rates", "alloc", "all"}));
  verify->add_option("--seeds", seeds, "Random instances / seeds per suite")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try
  {
    if (simulate->parsed())
    {
      return cmd_simulate(sim_opts, out_dir);
    }
    if (rates->parsed())
    {
      return cmd_rates(rates_opts, rates_out);
    }
    if (allocate->parsed())
    {
      return cmd_allocate(alloc_opts, metric, method, alloc_out);
    }
    return cmd_verify(suite, seeds);
  }
  catch (sbn::ModelError const &e)
  {
    print_error("model validation failed", {{"violations", violations_json(e.violations())}});
  }
  catch (std::exception const &e)
  {
    print_error(e.what());
  }
  return kExitFailure;
}
