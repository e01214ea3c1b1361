#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "gattaca/agent.hpp"
#include "gattaca/bn_model.hpp"
#include "gattaca/exact_analysis.hpp"
#include "gattaca/ipasip.hpp"

namespace gattaca {

/// Everything a pipeline run needs, loadable from an INI-style file:
///
///   [model]    path, env, target, allow_overlap
///   [run]      seed, out, cap, max_flips, repeats
///   [pasip]    n0 n1 n2 n3 d1 d2 k1 k2 k
///   [train]    steps, batch_size, gamma, ... (see dump_run_config)
struct RunConfig {
  std::string model_path;
  std::string env;     // "x1=0,x2=1"
  std::string target;  // same syntax
  bool allow_overlap = false;

  std::uint64_t seed = 0;
  std::string out;
  std::size_t cap = kDefaultMaxFreeNodes;
  std::size_t max_flips = 5;
  std::size_t repeats = 10;

  PasipConfig pasip;
  TrainConfig train;
};

RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::filesystem::path& path);

/// All keys with their current values, in a form parse_run_config accepts.
std::string dump_run_config(const RunConfig& cfg);

struct ResolvedConditions {
  PartialAssignment env;
  PartialAssignment target;
};

/// Resolves env and target against the model. Throws ConfigError on unknown
/// nodes, on env pins of non-input nodes, and on env/target overlap unless
/// allow_overlap is set.
ResolvedConditions resolve_conditions(const RunConfig& cfg, const BooleanNetwork& net);

}  // namespace gattaca
