#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gattaca/network_state.hpp"

namespace gattaca {

/// Expression tree over node references, constants, NOT, AND and OR.
///
/// Nodes are stored in post-order (children precede parents) and the root is
/// the last node. Grouping parentheses exist only in the source text.
class BooleanExpr {
 public:
  enum class Op : std::uint8_t { kConst, kVar, kNot, kAnd, kOr };

  struct Node {
    Op op;
    std::int32_t lhs;  // constant value, variable index or left child
    std::int32_t rhs;  // right child for AND / OR
  };

  static BooleanExpr constant(bool value);
  static BooleanExpr variable(std::size_t index);
  static BooleanExpr negate(BooleanExpr operand);
  static BooleanExpr conjunction(BooleanExpr lhs, BooleanExpr rhs);
  static BooleanExpr disjunction(BooleanExpr lhs, BooleanExpr rhs);

  /// Evaluates against any callable mapping a variable index to a bit.
  template <typename Lookup>
  bool evaluate(Lookup&& lookup) const {
    return eval_node(static_cast<std::int32_t>(nodes_.size()) - 1, lookup);
  }

  bool evaluate(const NetworkState& state) const {
    return evaluate([&state](std::size_t i) { return state.get(i); });
  }

  /// Sorted distinct variable indices appearing in the expression.
  std::vector<std::size_t> referenced_variables() const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  bool is_constant() const noexcept { return nodes_.size() == 1 && nodes_[0].op == Op::kConst; }

  /// BoolNet infix rendering with explicit parentheses around binary terms.
  std::string to_string(const std::vector<std::string>& names) const;

 private:
  template <typename Lookup>
  bool eval_node(std::int32_t idx, Lookup& lookup) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    switch (n.op) {
      case Op::kConst:
        return n.lhs != 0;
      case Op::kVar:
        return lookup(static_cast<std::size_t>(n.lhs));
      case Op::kNot:
        return !eval_node(n.lhs, lookup);
      case Op::kAnd:
        return eval_node(n.lhs, lookup) && eval_node(n.rhs, lookup);
      case Op::kOr:
        return eval_node(n.lhs, lookup) || eval_node(n.rhs, lookup);
    }
    return false;
  }

  std::string render(std::int32_t idx, const std::vector<std::string>& names) const;
  static BooleanExpr combine(Op op, BooleanExpr lhs, BooleanExpr rhs);

  std::vector<Node> nodes_;
};

/// Exact set of essential variables of expr via truth-table enumeration.
/// Throws ConfigError when expr references more than kMaxExactVariables
/// distinct variables.
inline constexpr std::size_t kMaxExactVariables = 20;
std::vector<std::size_t> essential_inputs(const BooleanExpr& expr, std::size_t node_count);

/// Essential variables for wide expressions: every candidate is probed with
/// 2^12 random contexts and kept only if a witness flip changes the output.
std::vector<std::size_t> essential_inputs_sampled(const BooleanExpr& expr, std::size_t node_count,
                                                  std::uint64_t seed = 0);

/// Mapping node index -> required bit. Used both for target configurations
/// and environmental conditions.
class PartialAssignment {
 public:
  PartialAssignment() = default;

  void pin(std::size_t node, bool value);
  std::optional<bool> value_of(std::size_t node) const;
  bool contains(std::size_t node) const { return pins_.count(node) != 0; }
  bool empty() const noexcept { return pins_.empty(); }
  std::size_t size() const noexcept { return pins_.size(); }

  /// True iff the state matches every pinned bit.
  bool aligns(const NetworkState& state) const;

  /// Overwrites the pinned bits of state.
  void apply(NetworkState& state) const;

  const std::map<std::size_t, bool>& pins() const noexcept { return pins_; }

  friend bool operator==(const PartialAssignment&, const PartialAssignment&) = default;

 private:
  std::map<std::size_t, bool> pins_;
};

struct StructureGraph {
  struct Edge {
    std::size_t source;  // parent x_j
    std::size_t target;  // child x_i
    friend bool operator==(const Edge&, const Edge&) = default;
  };

  std::size_t node_count = 0;
  /// Sorted by (target, source).
  std::vector<Edge> edges;
  /// in_neighbors[i] = Pa(x_i), ascending.
  std::vector<std::vector<std::size_t>> in_neighbors;
};

/// Immutable Boolean network: names, predictors and pruned parent sets.
class BooleanNetwork {
 public:
  BooleanNetwork(std::vector<std::string> names, std::vector<BooleanExpr> predictors);

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::size_t require_index(std::string_view name) const;

  const BooleanExpr& predictor(std::size_t i) const { return predictors_.at(i); }
  const std::vector<BooleanExpr>& predictors() const noexcept { return predictors_; }

  /// Essential variables of f_i, ascending.
  const std::vector<std::size_t>& parents(std::size_t i) const { return parents_.at(i); }

  bool is_input(std::size_t i) const { return is_input_.at(i); }
  std::vector<std::size_t> input_nodes() const;

  /// f_i(state).
  bool update_value(std::size_t i, const NetworkState& state) const { return predictors_[i].evaluate(state); }

  /// True iff every node's predictor reproduces its current bit.
  bool is_fixed_point(const NetworkState& state) const;

  /// Canonical BoolNet text (header plus one line per node).
  std::string to_bnet() const;

  /// 64-bit FNV-1a hash of to_bnet(); identifies the model in checkpoints.
  std::uint64_t model_hash() const;

 private:
  std::vector<std::string> names_;
  std::vector<BooleanExpr> predictors_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<bool> is_input_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

BooleanNetwork parse_bnet(std::istream& in);
BooleanNetwork parse_bnet(std::string_view text);
BooleanNetwork load_bnet_file(const std::string& path);

bool eval_expr(const BooleanExpr& expr, const NetworkState& state);

StructureGraph structure_graph(const BooleanNetwork& net);

/// Pins input nodes to constants. Throws ConfigError when env pins a
/// non-input node.
BooleanNetwork restrict_network(const BooleanNetwork& net, const PartialAssignment& env);

/// Parses "name=bit,name=bit" (';' also separates items).
PartialAssignment parse_assignment(const BooleanNetwork& net, std::string_view text);
std::string format_assignment(const BooleanNetwork& net, const PartialAssignment& assignment);

}  // namespace gattaca
