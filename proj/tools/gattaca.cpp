// gattaca: attractor analysis, PA-state identification, exact control
// reference and agent training/evaluation for Boolean network models.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gattaca/agent.hpp"
#include "gattaca/bn_model.hpp"
#include "gattaca/dynamics.hpp"
#include "gattaca/errors.hpp"
#include "gattaca/evaluation.hpp"
#include "gattaca/exact_analysis.hpp"
#include "gattaca/ipasip.hpp"
#include "gattaca/run_config.hpp"

using namespace gattaca;
using json = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kCapacity = 3, kEmpty = 4 };

struct Common {
  std::string config_path;
  std::optional<std::string> model;
  std::optional<std::string> env;
  std::optional<std::string> target;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> cap;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "INI run configuration");
  cmd->add_option("--model", c.model, "model file (.bnet)");
  cmd->add_option("--env", c.env, "environmental condition, e.g. x1=0,x2=1");
  cmd->add_option("--target", c.target, "target configuration, e.g. x5=1");
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--out", c.out, "output file");
  cmd->add_option("--cap", c.cap, "maximum number of free nodes for exact analysis");
}

RunConfig effective_config(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_run_config(c.config_path);
  if (c.model) cfg.model_path = *c.model;
  if (c.env) cfg.env = *c.env;
  if (c.target) cfg.target = *c.target;
  if (c.seed) cfg.seed = *c.seed;
  if (c.out) cfg.out = *c.out;
  if (c.cap) cfg.cap = *c.cap;
  cfg.train.env.pasip = cfg.pasip;
  return cfg;
}

BooleanNetwork load_model(const RunConfig& cfg) {
  if (cfg.model_path.empty()) throw ConfigError("no model given (use --model or [model] path)");
  return load_bnet_file(cfg.model_path);
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

json flips_json(const BooleanNetwork& net, const std::vector<std::size_t>& flips) {
  json arr = json::array();
  for (std::size_t i : flips) arr.push_back(net.names()[i]);
  return arr;
}

// ---------------------------------------------------------------------------

int cmd_attractors(const Common& c) {
  const RunConfig cfg = effective_config(c);
  const BooleanNetwork net = load_model(cfg);
  const auto [env, target] = resolve_conditions(cfg, net);
  const ExplicitStg stg = build_stg(net, env, cfg.cap);
  const auto attractors = attractors_exact(stg);

  json j;
  j["model"] = cfg.model_path;
  j["condition"] = format_assignment(net, env);
  j["free_nodes"] = stg.free_nodes().size();
  j["states"] = stg.state_count();
  auto& arr = j["attractors"] = json::array();
  for (std::size_t a = 0; a < attractors.size(); ++a) {
    const auto dist = stationary_distribution(stg, attractors[a]);
    json item;
    item["index"] = a;
    item["size"] = attractors[a].states.size();
    if (!target.empty()) item["aligned"] = is_target_attractor(stg, attractors[a], target);
    json states = json::array();
    for (std::size_t k = 0; k < dist.states.size(); ++k) {
      states.push_back({{"state_hex", stg.state_at(dist.states[k]).to_hex()}, {"probability", dist.probability[k]}});
    }
    item["states"] = std::move(states);
    json pa = json::array();
    for (std::uint32_t s : pseudo_attractor_exact(dist)) pa.push_back(stg.state_at(s).to_hex());
    item["pseudo_attractor"] = std::move(pa);
    arr.push_back(std::move(item));
  }
  emit(cfg.out, j.dump(2) + "\n");
  std::cerr << attractors.size() << " attractor(s)\n";
  return kOk;
}

int cmd_pasip(const Common& c) {
  const RunConfig cfg = effective_config(c);
  const BooleanNetwork net = load_model(cfg);
  const auto [env, target] = resolve_conditions(cfg, net);
  const PAStateRegistry reg = phase1_scan(net, env, cfg.pasip, RngStream(cfg.seed, "pasip"));
  emit(cfg.out, reg.to_json());
  std::cerr << reg.size() << " PA state(s)\n";
  return reg.empty() ? kEmpty : kOk;
}

int cmd_oracle(const Common& c, std::size_t max_flips_override, bool per_condition) {
  RunConfig cfg = effective_config(c);
  if (max_flips_override) cfg.max_flips = max_flips_override;
  const BooleanNetwork net = load_model(cfg);
  const auto [env, target] = resolve_conditions(cfg, net);
  if (target.empty()) throw ConfigError("oracle needs a target (--target)");
  const ControlReference ref = control_reference(net, env, target, cfg.max_flips, cfg.cap, per_condition);

  json j;
  j["model"] = cfg.model_path;
  j["condition"] = format_assignment(net, env);
  j["target"] = format_assignment(net, target);
  j["max_flips"] = cfg.max_flips;
  j["per_condition"] = per_condition;
  auto& arr = j["sources"] = json::array();
  std::size_t solved = 0;
  for (const SourceControl& s : ref.sources) {
    json item;
    item["condition"] = s.condition;
    item["source_hex"] = s.representative.to_hex();
    item["attractor_size"] = s.attractor_size;
    item["length"] = s.length ? json(*s.length) : json(nullptr);
    item["switched_condition"] = s.switched;
    json steps = json::array();
    for (const ControlStep& step : s.strategy) steps.push_back(flips_json(net, step.flips));
    item["strategy"] = std::move(steps);
    arr.push_back(std::move(item));
    if (s.length) ++solved;
  }
  j["acpl"] = std::isfinite(ref.acpl.mean) ? json(ref.acpl.mean) : json(nullptr);
  j["unreachable_sources"] = ref.acpl.unreachable_sources;
  emit(cfg.out, j.dump(2) + "\n");
  if (!ref.sources.empty() && solved == 0) {
    std::cerr << "no control strategy exists for any source\n";
    return kEmpty;
  }
  return kOk;
}

std::string checkpoint_metadata(const RunConfig& cfg, const BooleanNetwork& net, const ControlEnvironment& env,
                                const PAStateRegistry& registry) {
  json j;
  j["model"] = cfg.model_path;
  j["nodes"] = net.names();
  j["condition"] = format_assignment(net, env.environment());
  j["target"] = format_assignment(net, env.target());
  json pert = json::array();
  for (std::size_t i : env.perturbable()) pert.push_back(net.names()[i]);
  j["perturbable"] = std::move(pert);
  j["branches"] = env.branches();
  j["max_actions"] = env.config().max_actions;
  j["perturb_inputs"] = env.config().perturb_inputs;
  j["seed"] = cfg.seed;
  j["registry"] = json::parse(registry.to_json());
  return j.dump();
}

int cmd_train(const Common& c, std::optional<std::uint64_t> steps, std::optional<std::uint64_t> update_every,
              std::string log_path) {
  RunConfig cfg = effective_config(c);
  if (steps) cfg.train.steps = *steps;
  if (update_every) cfg.train.update_every = *update_every;
  const BooleanNetwork net = load_model(cfg);
  const auto [env, target] = resolve_conditions(cfg, net);
  if (target.empty()) throw ConfigError("training needs a target (--target)");
  const std::string out = cfg.out.empty() ? "agent.ckpt" : cfg.out;
  if (log_path.empty()) log_path = out + ".log.csv";

  PAStateRegistry registry = phase1_scan(net, env, cfg.pasip, RngStream(cfg.seed, "pasip"));
  {
    ControlEnvironment probe(net, env, target, registry, cfg.train.env);
    if (probe.misaligned_states().empty()) {
      std::cerr << "every PA state already aligns with the target; nothing to train\n";
      return kEmpty;
    }
  }
  TrainResult res = train(net, env, target, std::move(registry), cfg.train, cfg.seed);
  ControlEnvironment final_env(net, env, target, res.registry, cfg.train.env);
  save_checkpoint(out, res.online, res.target, net.model_hash(), checkpoint_metadata(cfg, net, final_env, res.registry));
  const std::string log = training_log_csv(res.log);
  emit(log_path, log);
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(log)));
  std::cout << "checkpoint " << out << "\nlog " << log_path << "\nlog_hash " << hash << "\nregistry_size "
            << res.registry.size() << "\naborted_steps " << res.aborted_steps << '\n';
  return kOk;
}

int cmd_evaluate(const Common& c, const std::string& checkpoint_path, std::optional<std::size_t> repeats,
                 std::string summary_path, bool with_oracle) {
  RunConfig cfg = effective_config(c);
  if (repeats) cfg.repeats = *repeats;
  const BooleanNetwork net = load_model(cfg);
  Checkpoint ck = load_checkpoint(checkpoint_path);
  if (ck.model_hash != net.model_hash()) throw ConfigError("checkpoint was trained on a different model");
  const json meta = json::parse(ck.metadata);
  if (!c.env && c.config_path.empty()) cfg.env = meta.at("condition").get<std::string>();
  if (!c.target && c.config_path.empty()) cfg.target = meta.at("target").get<std::string>();
  const auto [env, target] = resolve_conditions(cfg, net);
  if (target.empty()) throw ConfigError("evaluation needs a target");

  EnvConfig env_cfg = cfg.train.env;
  env_cfg.branches = meta.at("branches").get<std::size_t>();
  env_cfg.max_actions = meta.at("max_actions").get<std::size_t>();
  env_cfg.perturb_inputs = meta.at("perturb_inputs").get<bool>();
  PAStateRegistry registry = PAStateRegistry::from_json(meta.at("registry").dump(), net.size());
  ControlEnvironment environment(net, env, target, registry, env_cfg);
  if (environment.action_count() != ck.online.dims().actions) {
    throw ConfigError("checkpoint action space does not match the model and target");
  }
  const auto sources = environment.misaligned_states();
  if (sources.empty()) {
    std::cerr << "no misaligned PA state to evaluate from\n";
    return kEmpty;
  }

  EvaluationReport report = evaluate(ck.online, environment, sources, cfg.repeats, RngStream(cfg.seed, "evaluate"));
  report.model = cfg.model_path;
  report.condition = format_assignment(net, env);
  if (with_oracle) {
    try {
      const ExplicitStg stg = build_stg(net, env, cfg.cap);
      const auto attractors = attractors_exact(stg);
      const BasinAnalysis basins(stg, attractors);
      std::map<NetworkState, double> oracle;
      for (const NetworkState& s : sources) {
        const auto idx = stg.index_of(s);
        if (!idx || basins.attractor_of(*idx) < 0) continue;
        const OracleResult r = min_control_oracle(stg, attractors, basins,
                                                  static_cast<std::size_t>(basins.attractor_of(*idx)), target,
                                                  cfg.max_flips);
        if (r.length) oracle[s] = static_cast<double>(*r.length);
      }
      const GapReport gaps = compare_to_oracle(report, oracle);
      std::cerr << "oracle compared " << gaps.compared << " source(s), flagged " << gaps.flagged << '\n';
    } catch (const CapacityError& e) {
      std::cerr << "oracle skipped: " << e.what() << '\n';
    }
  }
  const std::string out = cfg.out.empty() ? "evaluation.csv" : cfg.out;
  if (summary_path.empty()) summary_path = out + ".json";
  emit(out, report_csv(report));
  emit(summary_path, report_json(report));
  std::cout << "success_rate " << report.success_rate << "\nmean_length " << report.overall_mean << '\n';
  return kOk;
}

int cmd_simulate(const Common& c, std::uint64_t steps, const std::string& start, bool counts) {
  const RunConfig cfg = effective_config(c);
  const BooleanNetwork net = load_model(cfg);
  const auto [env, target] = resolve_conditions(cfg, net);
  const BooleanNetwork dyn = restrict_network(net, env);
  RngStream rng(cfg.seed, "simulate");
  NetworkState s0 = start.empty() ? random_state(net.size(), env, rng) : NetworkState::from_hex(start, net.size());
  env.apply(s0);
  const Trajectory t = simulate(dyn, s0, steps, rng, true);
  std::ostringstream out;
  if (counts) {
    std::vector<std::pair<NetworkState, std::uint64_t>> rows(t.visits.begin(), t.visits.end());
    std::sort(rows.begin(), rows.end());
    out << "state_hex,visits\n";
    for (const auto& [state, n] : rows) out << state.to_hex() << ',' << n << '\n';
  } else {
    write_trajectory_csv(out, t);
  }
  emit(cfg.out, out.str());
  return kOk;
}

int cmd_config(const Common& c, bool dump) {
  const RunConfig cfg = effective_config(c);
  if (dump) std::cout << dump_run_config(cfg);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boolean network attractor-target control"};
  app.require_subcommand(1);

  Common c;
  auto* attractors = app.add_subcommand("attractors", "exact attractors and pseudo-attractors");
  add_common(attractors, c);

  auto* pasip = app.add_subcommand("pasip", "identify pseudo-attractor states by simulation");
  add_common(pasip, c);

  std::size_t max_flips = 0;
  bool per_condition = false;
  auto* oracle = app.add_subcommand("oracle", "exact minimal control lengths and ACPL");
  add_common(oracle, c);
  oracle->add_option("--max-flips", max_flips, "nodes flipped per intervention (default 5)");
  oracle->add_flag("--per-condition", per_condition, "analyse every assignment of the unpinned inputs separately");

  std::optional<std::uint64_t> steps;
  std::optional<std::uint64_t> update_every;
  std::string log_path;
  auto* train_cmd = app.add_subcommand("train", "train a control agent");
  add_common(train_cmd, c);
  train_cmd->add_option("--steps", steps, "environment steps");
  train_cmd->add_option("--update-every", update_every, "environment steps per gradient update");
  train_cmd->add_option("--log", log_path, "training log CSV (default <out>.log.csv)");

  std::string checkpoint;
  std::optional<std::size_t> repeats;
  std::string summary;
  bool no_oracle = false;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "recover and score control strategies");
  add_common(evaluate_cmd, c);
  evaluate_cmd->add_option("--checkpoint", checkpoint, "trained agent")->required();
  evaluate_cmd->add_option("--repeats", repeats, "recoveries per source (default 10)");
  evaluate_cmd->add_option("--summary", summary, "summary JSON (default <out>.json)");
  evaluate_cmd->add_flag("--no-oracle", no_oracle, "skip the exact comparison");

  std::uint64_t sim_steps = 1000;
  std::string start;
  bool counts = false;
  auto* simulate_cmd = app.add_subcommand("simulate", "asynchronous trajectory as CSV");
  add_common(simulate_cmd, c);
  simulate_cmd->add_option("--steps", sim_steps, "number of updates");
  simulate_cmd->add_option("--start", start, "initial state (hex); random when omitted");
  simulate_cmd->add_flag("--counts", counts, "emit per-state visit counts instead of the trajectory");

  bool dump = false;
  auto* config = app.add_subcommand("config", "show the effective configuration");
  add_common(config, c);
  config->add_flag("--dump", dump, "print every key with its value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*attractors) return cmd_attractors(c);
    if (*pasip) return cmd_pasip(c);
    if (*oracle) return cmd_oracle(c, max_flips, per_condition);
    if (*train_cmd) return cmd_train(c, steps, update_every, log_path);
    if (*evaluate_cmd) return cmd_evaluate(c, checkpoint, repeats, summary, !no_oracle);
    if (*simulate_cmd) return cmd_simulate(c, sim_steps, start, counts);
    if (*config) return cmd_config(c, dump);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCapacity;
  } catch (const EmptyResultError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kEmpty;
  } catch (const EnvironmentFault& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kEmpty;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
