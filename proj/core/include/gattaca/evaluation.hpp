#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gattaca/agent.hpp"
#include "gattaca/neural.hpp"
#include "gattaca/rng.hpp"

namespace gattaca {

struct RecoveryOutcome {
  NetworkState source;
  bool success = false;
  std::vector<std::vector<std::size_t>> strategy;  // flip set of every action taken
  std::size_t length = 0;                          // actions taken
  std::vector<NetworkState> visited;               // PA state after each action
  bool aborted = false;
};

/// Greedy rollout from a registered, misaligned source until alignment or
/// the episode cap.
RecoveryOutcome recover_strategy(const BdqNetwork& agent, ControlEnvironment& env, const NetworkState& source,
                                 RngStream& rng);

struct RecoveryRecord {
  NetworkState source;
  std::size_t repeat = 0;
  bool success = false;
  std::size_t length = 0;
};

struct SourceSummary {
  NetworkState source;
  std::size_t repeats = 0;
  std::size_t successes = 0;
  double mean_length = 0.0;  // over successful repeats; NaN when none succeeded
  double success_rate() const { return repeats ? static_cast<double>(successes) / static_cast<double>(repeats) : 0.0; }
  std::optional<double> oracle_length;
  std::optional<double> gap;  // mean_length - oracle_length
  bool flagged = false;       // gap > 1
};

struct EvaluationReport {
  std::string model;
  std::string condition;
  std::vector<RecoveryRecord> records;
  std::vector<SourceSummary> sources;
  double overall_mean = 0.0;   // unweighted mean of per-source means; NaN if none
  double success_rate = 0.0;   // over all recoveries
  std::size_t sources_without_success = 0;
};

inline constexpr std::size_t kDefaultRepeats = 10;

/// `repeats` recoveries per source, each on substream
/// "recover/<source hex>/<repeat>" of `rng`.
EvaluationReport evaluate(const BdqNetwork& agent, ControlEnvironment& env, const std::vector<NetworkState>& sources,
                          std::size_t repeats, const RngStream& rng);

struct GapReport {
  std::size_t compared = 0;
  std::size_t flagged = 0;
  std::optional<double> max_gap;
};

/// Fills oracle lengths and gaps of the report's sources. Sources missing
/// from the oracle map, or without a success, get no gap.
GapReport compare_to_oracle(EvaluationReport& report, const std::map<NetworkState, double>& oracle);

/// CSV with columns model,condition,source_hex,repeat,success,length.
std::string report_csv(const EvaluationReport& report);
/// Summary: means, success rates and oracle gaps.
std::string report_json(const EvaluationReport& report);

}  // namespace gattaca
