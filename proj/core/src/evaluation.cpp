#include "gattaca/evaluation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gattaca/errors.hpp"

namespace gattaca {

RecoveryOutcome recover_strategy(const BdqNetwork& agent, ControlEnvironment& env, const NetworkState& source,
                                 RngStream& rng) {
  RecoveryOutcome out;
  out.source = source;
  env.reset_to(source);
  NetworkState state = source;
  while (env.active()) {
    const StepResult r = env.step(greedy_action(agent, state), rng);
    out.strategy.push_back(r.flips);
    out.visited.push_back(r.next);
    state = r.next;
    if (r.aborted) {
      out.aborted = true;
      break;
    }
    out.success = r.success;
  }
  out.length = out.strategy.size();
  return out;
}

EvaluationReport evaluate(const BdqNetwork& agent, ControlEnvironment& env, const std::vector<NetworkState>& sources,
                          std::size_t repeats, const RngStream& rng) {
  if (sources.empty()) throw ConfigError("evaluation needs at least one source state");
  if (repeats == 0) throw ConfigError("evaluation needs at least one repeat");
  EvaluationReport report;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double mean_sum = 0.0;
  std::size_t mean_count = 0;
  std::size_t total_success = 0;
  for (const NetworkState& source : sources) {
    SourceSummary summary;
    summary.source = source;
    summary.repeats = repeats;
    double length_sum = 0.0;
    for (std::size_t k = 0; k < repeats; ++k) {
      RngStream sub = rng.substream("recover/" + source.to_hex() + "/" + std::to_string(k));
      const RecoveryOutcome o = recover_strategy(agent, env, source, sub);
      report.records.push_back({source, k, o.success, o.length});
      if (o.success) {
        ++summary.successes;
        length_sum += static_cast<double>(o.length);
      }
    }
    total_success += summary.successes;
    if (summary.successes > 0) {
      summary.mean_length = length_sum / static_cast<double>(summary.successes);
      mean_sum += summary.mean_length;
      ++mean_count;
    } else {
      summary.mean_length = nan;
      ++report.sources_without_success;
    }
    report.sources.push_back(summary);
  }
  report.overall_mean = mean_count ? mean_sum / static_cast<double>(mean_count) : nan;
  report.success_rate = static_cast<double>(total_success) / static_cast<double>(report.records.size());
  return report;
}

GapReport compare_to_oracle(EvaluationReport& report, const std::map<NetworkState, double>& oracle) {
  GapReport gaps;
  for (SourceSummary& s : report.sources) {
    auto it = oracle.find(s.source);
    if (it == oracle.end()) continue;
    s.oracle_length = it->second;
    if (s.successes == 0) continue;
    s.gap = s.mean_length - it->second;
    s.flagged = *s.gap > 1.0;
    ++gaps.compared;
    if (s.flagged) ++gaps.flagged;
    if (!gaps.max_gap || *s.gap > *gaps.max_gap) gaps.max_gap = s.gap;
  }
  return gaps;
}

std::string report_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "model,condition,source_hex,repeat,success,length\n";
  for (const RecoveryRecord& r : report.records) {
    out << report.model << ',' << report.condition << ',' << r.source.to_hex() << ',' << r.repeat << ','
        << (r.success ? 1 : 0) << ',' << r.length << '\n';
  }
  return out.str();
}

namespace {

nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::string report_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["model"] = report.model;
  j["condition"] = report.condition;
  j["overall_mean_length"] = number_or_null(report.overall_mean);
  j["success_rate"] = report.success_rate;
  j["sources_without_success"] = report.sources_without_success;
  auto& arr = j["sources"] = nlohmann::ordered_json::array();
  for (const SourceSummary& s : report.sources) {
    nlohmann::ordered_json item;
    item["source_hex"] = s.source.to_hex();
    item["repeats"] = s.repeats;
    item["successes"] = s.successes;
    item["success_rate"] = s.success_rate();
    item["mean_length"] = number_or_null(s.mean_length);
    item["oracle_length"] = number_or_null(s.oracle_length.value_or(std::numeric_limits<double>::quiet_NaN()));
    item["gap"] = number_or_null(s.gap.value_or(std::numeric_limits<double>::quiet_NaN()));
    item["flagged"] = s.flagged;
    arr.push_back(std::move(item));
  }
  return j.dump(2) + "\n";
}

}  // namespace gattaca
