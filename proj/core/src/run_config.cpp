#include "gattaca/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gattaca/errors.hpp"

namespace gattaca {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw ConfigError("invalid value '" + text + "' for " + key);
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("invalid boolean '" + text + "' for " + key);
}

/// One configurable key: how to print it and how to read it back.
struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <class T>
Field number(std::string section, std::string key, T RunConfig::*outer) {
  const std::string name = section + "." + key;
  return {section, key, [outer](const RunConfig& c) { return std::to_string(c.*outer); },
          [outer, name](RunConfig& c, const std::string& v) { c.*outer = parse_number<T>(name, v); }};
}

template <class T, class Get>
Field nested(std::string section, std::string key, Get get) {
  const std::string name = section + "." + key;
  Field f{section, key, nullptr, nullptr};
  f.get = [get](const RunConfig& c) {
    const T& ref = get(const_cast<RunConfig&>(c));
    if constexpr (std::is_same_v<T, double>) {
      return format_double(ref);
    } else if constexpr (std::is_same_v<T, bool>) {
      return std::string(ref ? "true" : "false");
    } else {
      return std::to_string(ref);
    }
  };
  f.set = [get, name](RunConfig& c, const std::string& v) {
    T& ref = get(c);
    if constexpr (std::is_same_v<T, bool>) {
      ref = parse_bool(name, v);
    } else {
      ref = parse_number<T>(name, v);
    }
  };
  return f;
}

Field text(std::string section, std::string key, std::string RunConfig::*member) {
  return {section, key, [member](const RunConfig& c) { return c.*member; },
          [member](RunConfig& c, const std::string& v) { c.*member = v; }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> f;
    f.push_back(text("model", "path", &RunConfig::model_path));
    f.push_back(text("model", "env", &RunConfig::env));
    f.push_back(text("model", "target", &RunConfig::target));
    f.push_back(nested<bool>("model", "allow_overlap", [](RunConfig& c) -> bool& { return c.allow_overlap; }));

    f.push_back(number("run", "seed", &RunConfig::seed));
    f.push_back(text("run", "out", &RunConfig::out));
    f.push_back(number("run", "cap", &RunConfig::cap));
    f.push_back(number("run", "max_flips", &RunConfig::max_flips));
    f.push_back(number("run", "repeats", &RunConfig::repeats));

    using U = std::uint64_t;
    f.push_back(nested<U>("pasip", "n0", [](RunConfig& c) -> U& { return c.pasip.burn_in; }));
    f.push_back(nested<U>("pasip", "n1", [](RunConfig& c) -> U& { return c.pasip.count_window; }));
    f.push_back(nested<U>("pasip", "n2", [](RunConfig& c) -> U& { return c.pasip.fixed_point_dwell; }));
    f.push_back(nested<U>("pasip", "n3", [](RunConfig& c) -> U& { return c.pasip.history_size; }));
    f.push_back(nested<U>("pasip", "d1", [](RunConfig& c) -> U& { return c.pasip.offline_checkpoint; }));
    f.push_back(nested<U>("pasip", "d2", [](RunConfig& c) -> U& { return c.pasip.online_checkpoint; }));
    f.push_back(nested<unsigned>("pasip", "k1", [](RunConfig& c) -> unsigned& { return c.pasip.dominance_percent; }));
    f.push_back(nested<unsigned>("pasip", "k2", [](RunConfig& c) -> unsigned& { return c.pasip.history_percent; }));
    f.push_back(nested<std::size_t>("pasip", "k", [](RunConfig& c) -> std::size_t& { return c.pasip.trajectories; }));

    using S = std::size_t;
    f.push_back(nested<U>("train", "steps", [](RunConfig& c) -> U& { return c.train.steps; }));
    f.push_back(nested<S>("train", "batch_size", [](RunConfig& c) -> S& { return c.train.batch_size; }));
    f.push_back(nested<double>("train", "gamma", [](RunConfig& c) -> double& { return c.train.gamma; }));
    f.push_back(nested<S>("train", "replay_capacity", [](RunConfig& c) -> S& { return c.train.replay_capacity; }));
    f.push_back(nested<double>("train", "per_alpha", [](RunConfig& c) -> double& { return c.train.per_alpha; }));
    f.push_back(nested<double>("train", "beta_start", [](RunConfig& c) -> double& { return c.train.beta_start; }));
    f.push_back(nested<double>("train", "beta_end", [](RunConfig& c) -> double& { return c.train.beta_end; }));
    f.push_back(
        nested<double>("train", "priority_floor", [](RunConfig& c) -> double& { return c.train.priority_floor; }));
    f.push_back(nested<double>("train", "tau", [](RunConfig& c) -> double& { return c.train.tau; }));
    f.push_back(nested<double>("train", "epsilon_start", [](RunConfig& c) -> double& { return c.train.epsilon_start; }));
    f.push_back(nested<double>("train", "epsilon_end", [](RunConfig& c) -> double& { return c.train.epsilon_end; }));
    f.push_back(nested<U>("train", "epsilon_horizon", [](RunConfig& c) -> U& { return c.train.epsilon_horizon; }));
    f.push_back(nested<U>("train", "warmup", [](RunConfig& c) -> U& { return c.train.warmup; }));
    f.push_back(nested<U>("train", "update_every", [](RunConfig& c) -> U& { return c.train.update_every; }));
    f.push_back(
        nested<double>("train", "learning_rate", [](RunConfig& c) -> double& { return c.train.adam.learning_rate; }));
    f.push_back(nested<double>("train", "adam_beta1", [](RunConfig& c) -> double& { return c.train.adam.beta1; }));
    f.push_back(nested<double>("train", "adam_beta2", [](RunConfig& c) -> double& { return c.train.adam.beta2; }));
    f.push_back(nested<double>("train", "adam_epsilon", [](RunConfig& c) -> double& { return c.train.adam.epsilon; }));
    f.push_back(nested<double>("train", "clip_norm", [](RunConfig& c) -> double& { return c.train.adam.clip_norm; }));
    f.push_back(nested<S>("train", "max_actions", [](RunConfig& c) -> S& { return c.train.env.max_actions; }));
    f.push_back(nested<S>("train", "branches", [](RunConfig& c) -> S& { return c.train.env.branches; }));
    f.push_back(nested<bool>("train", "perturb_inputs", [](RunConfig& c) -> bool& { return c.train.env.perturb_inputs; }));
    f.push_back(nested<U>("train", "evolve_budget", [](RunConfig& c) -> U& { return c.train.env.evolve_budget; }));
    f.push_back(nested<S>("train", "conv_width", [](RunConfig& c) -> S& { return c.train.network.conv_width; }));
    f.push_back(nested<S>("train", "kernel_hidden", [](RunConfig& c) -> S& { return c.train.network.kernel_hidden; }));
    return f;
  }();
  return all;
}

}  // namespace

RunConfig parse_run_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  std::map<std::pair<std::string, std::string>, const Field*> index;
  for (const Field& f : fields()) index[{f.section, f.key}] = &f;

  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config key '" + section + "' must belong to a [section]");
    for (const auto& [key, value] : body) {
      auto it = index.find({section, key});
      if (it == index.end()) throw ConfigError("unknown config key " + section + "." + key);
      it->second->set(cfg, value.get_value<std::string>());
    }
  }
  cfg.pasip.validate();
  cfg.train.env.pasip = cfg.pasip;
  cfg.train.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_run_config(in);
}

std::string dump_run_config(const RunConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const Field& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << f.get(cfg) << '\n';
  }
  return out.str();
}

ResolvedConditions resolve_conditions(const RunConfig& cfg, const BooleanNetwork& net) {
  ResolvedConditions r{parse_assignment(net, cfg.env), parse_assignment(net, cfg.target)};
  for (const auto& [node, value] : r.env.pins()) {
    if (!net.is_input(node)) throw ConfigError("environmental condition pins non-input node " + net.names()[node]);
  }
  if (!cfg.allow_overlap) {
    for (const auto& [node, value] : r.target.pins()) {
      if (r.env.contains(node)) {
        throw ConfigError("node " + net.names()[node] + " appears in both the condition and the target");
      }
    }
  }
  return r;
}

}  // namespace gattaca
