#include "gattaca/bn_model.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "gattaca/errors.hpp"

namespace gattaca {

// ---------------------------------------------------------------------------
// BooleanExpr

BooleanExpr BooleanExpr::constant(bool value) {
  BooleanExpr e;
  e.nodes_.push_back({Op::kConst, value ? 1 : 0, -1});
  return e;
}

BooleanExpr BooleanExpr::variable(std::size_t index) {
  BooleanExpr e;
  e.nodes_.push_back({Op::kVar, static_cast<std::int32_t>(index), -1});
  return e;
}

BooleanExpr BooleanExpr::negate(BooleanExpr operand) {
  const auto child = static_cast<std::int32_t>(operand.nodes_.size()) - 1;
  operand.nodes_.push_back({Op::kNot, child, -1});
  return operand;
}

BooleanExpr BooleanExpr::combine(Op op, BooleanExpr lhs, BooleanExpr rhs) {
  const auto offset = static_cast<std::int32_t>(lhs.nodes_.size());
  const std::int32_t left_root = offset - 1;
  for (Node n : rhs.nodes_) {
    if (n.op == Op::kNot) {
      n.lhs += offset;
    } else if (n.op == Op::kAnd || n.op == Op::kOr) {
      n.lhs += offset;
      n.rhs += offset;
    }
    lhs.nodes_.push_back(n);
  }
  const auto right_root = static_cast<std::int32_t>(lhs.nodes_.size()) - 1;
  lhs.nodes_.push_back({op, left_root, right_root});
  return lhs;
}

BooleanExpr BooleanExpr::conjunction(BooleanExpr lhs, BooleanExpr rhs) {
  return combine(Op::kAnd, std::move(lhs), std::move(rhs));
}

BooleanExpr BooleanExpr::disjunction(BooleanExpr lhs, BooleanExpr rhs) {
  return combine(Op::kOr, std::move(lhs), std::move(rhs));
}

std::vector<std::size_t> BooleanExpr::referenced_variables() const {
  std::vector<std::size_t> vars;
  for (const Node& n : nodes_) {
    if (n.op == Op::kVar) vars.push_back(static_cast<std::size_t>(n.lhs));
  }
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

std::string BooleanExpr::render(std::int32_t idx, const std::vector<std::string>& names) const {
  const Node& n = nodes_[static_cast<std::size_t>(idx)];
  switch (n.op) {
    case Op::kConst:
      return n.lhs != 0 ? "1" : "0";
    case Op::kVar:
      return names.at(static_cast<std::size_t>(n.lhs));
    case Op::kNot:
      return "!" + render(n.lhs, names);
    case Op::kAnd:
      return "(" + render(n.lhs, names) + " & " + render(n.rhs, names) + ")";
    case Op::kOr:
      return "(" + render(n.lhs, names) + " | " + render(n.rhs, names) + ")";
  }
  return {};
}

std::string BooleanExpr::to_string(const std::vector<std::string>& names) const {
  return render(static_cast<std::int32_t>(nodes_.size()) - 1, names);
}

bool eval_expr(const BooleanExpr& expr, const NetworkState& state) { return expr.evaluate(state); }

// ---------------------------------------------------------------------------
// Essential variables

std::vector<std::size_t> essential_inputs(const BooleanExpr& expr, std::size_t node_count) {
  const std::vector<std::size_t> vars = expr.referenced_variables();
  for (std::size_t v : vars) {
    if (v >= node_count) throw ConfigError("expression references node " + std::to_string(v) + " out of range");
  }
  if (vars.size() > kMaxExactVariables) {
    throw ConfigError("expression has " + std::to_string(vars.size()) + " variables; exhaustive check supports " +
                      std::to_string(kMaxExactVariables));
  }
  const std::size_t k = vars.size();
  const std::size_t rows = std::size_t{1} << k;
  std::vector<std::uint8_t> table(rows);
  for (std::size_t row = 0; row < rows; ++row) {
    table[row] = expr.evaluate([&](std::size_t var) {
      const auto pos = static_cast<std::size_t>(std::lower_bound(vars.begin(), vars.end(), var) - vars.begin());
      return ((row >> pos) & 1U) != 0;
    });
  }
  std::vector<std::size_t> essential;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t bit = std::size_t{1} << j;
    for (std::size_t row = 0; row < rows; ++row) {
      if ((row & bit) == 0 && table[row] != table[row | bit]) {
        essential.push_back(vars[j]);
        break;
      }
    }
  }
  return essential;
}

std::vector<std::size_t> essential_inputs_sampled(const BooleanExpr& expr, std::size_t node_count,
                                                  std::uint64_t seed) {
  constexpr std::size_t kSamples = std::size_t{1} << 12;
  const std::vector<std::size_t> vars = expr.referenced_variables();
  std::mt19937_64 rng(seed ^ 0x5eedULL);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::size_t> essential;
  std::vector<std::uint8_t> context(node_count, 0);
  for (std::size_t candidate : vars) {
    for (std::size_t s = 0; s < kSamples; ++s) {
      for (std::size_t v : vars) context[v] = coin(rng) ? 1 : 0;
      context[candidate] = 0;
      const bool low = expr.evaluate([&](std::size_t i) { return context[i] != 0; });
      context[candidate] = 1;
      const bool high = expr.evaluate([&](std::size_t i) { return context[i] != 0; });
      if (low != high) {
        essential.push_back(candidate);
        break;
      }
    }
  }
  return essential;
}

// ---------------------------------------------------------------------------
// PartialAssignment

void PartialAssignment::pin(std::size_t node, bool value) {
  auto [it, inserted] = pins_.emplace(node, value);
  if (!inserted) throw ConfigError("node " + std::to_string(node) + " pinned twice");
}

std::optional<bool> PartialAssignment::value_of(std::size_t node) const {
  auto it = pins_.find(node);
  if (it == pins_.end()) return std::nullopt;
  return it->second;
}

bool PartialAssignment::aligns(const NetworkState& state) const {
  return std::all_of(pins_.begin(), pins_.end(), [&](const auto& p) { return state.get(p.first) == p.second; });
}

void PartialAssignment::apply(NetworkState& state) const {
  for (const auto& [node, value] : pins_) state.set(node, value);
}

// ---------------------------------------------------------------------------
// BooleanNetwork

BooleanNetwork::BooleanNetwork(std::vector<std::string> names, std::vector<BooleanExpr> predictors)
    : names_(std::move(names)), predictors_(std::move(predictors)) {
  const std::size_t n = names_.size();
  if (n == 0) throw ConfigError("network must have at least one node");
  if (n != predictors_.size()) throw ConfigError("names and predictors differ in length");
  if (n > NetworkState::kMaxNodes) {
    throw CapacityError("network has " + std::to_string(n) + " nodes; at most " +
                        std::to_string(NetworkState::kMaxNodes) + " supported");
  }
  parents_.resize(n);
  is_input_.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (!index_.emplace(names_[i], i).second) throw ConfigError("duplicate node name '" + names_[i] + "'");
    const BooleanExpr& f = predictors_[i];
    const auto refs = f.referenced_variables();
    if (!refs.empty() && refs.back() >= n) throw ConfigError("predictor of '" + names_[i] + "' references unknown node");
    parents_[i] = refs.size() <= kMaxExactVariables ? essential_inputs(f, n) : essential_inputs_sampled(f, n, i);
    if (parents_[i].size() == 1 && parents_[i][0] == i) {
      // f depends on x_i alone: identity or negation
      is_input_[i] = f.evaluate([](std::size_t) { return true; }) && !f.evaluate([](std::size_t) { return false; });
    }
  }
}

std::optional<std::size_t> BooleanNetwork::index_of(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t BooleanNetwork::require_index(std::string_view name) const {
  auto idx = index_of(name);
  if (!idx) throw ConfigError("unknown node '" + std::string(name) + "'");
  return *idx;
}

std::vector<std::size_t> BooleanNetwork::input_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (is_input_[i]) out.push_back(i);
  }
  return out;
}

bool BooleanNetwork::is_fixed_point(const NetworkState& state) const {
  for (std::size_t i = 0; i < size(); ++i) {
    if (predictors_[i].evaluate(state) != state.get(i)) return false;
  }
  return true;
}

std::string BooleanNetwork::to_bnet() const {
  std::string out = "targets, factors\n";
  for (std::size_t i = 0; i < size(); ++i) {
    out += names_[i];
    out += ", ";
    out += predictors_[i].to_string(names_);
    out += '\n';
  }
  return out;
}

std::uint64_t BooleanNetwork::model_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_bnet()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

StructureGraph structure_graph(const BooleanNetwork& net) {
  StructureGraph g;
  g.node_count = net.size();
  g.in_neighbors.resize(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    g.in_neighbors[i] = net.parents(i);
    for (std::size_t j : net.parents(i)) g.edges.push_back({j, i});
  }
  return g;
}

BooleanNetwork restrict_network(const BooleanNetwork& net, const PartialAssignment& env) {
  std::vector<BooleanExpr> predictors = net.predictors();
  for (const auto& [node, value] : env.pins()) {
    if (node >= net.size()) throw ConfigError("environment pins node index out of range");
    if (!net.is_input(node)) {
      throw ConfigError("environment pins '" + net.name(node) + "', which is not an input node");
    }
    predictors[node] = BooleanExpr::constant(value);
  }
  return BooleanNetwork(net.names(), std::move(predictors));
}

// ---------------------------------------------------------------------------
// BoolNet parsing

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct SourceLine {
  std::size_t number;
  std::string text;
};

/// Recursive-descent parser for one expression; precedence ! > & > |.
class ExprParser {
 public:
  ExprParser(const SourceLine& line, std::size_t start, std::map<std::string, std::size_t, std::less<>>& index,
             std::vector<std::string>& auto_declared, std::size_t& next_index)
      : line_(line), pos_(start), index_(index), auto_declared_(auto_declared), next_index_(next_index) {}

  BooleanExpr parse() {
    BooleanExpr e = parse_or();
    skip_space();
    if (pos_ < line_.text.size()) fail("unexpected '" + std::string(1, line_.text[pos_]) + "'");
    return e;
  }

 private:
  BooleanExpr parse_or() {
    BooleanExpr lhs = parse_and();
    while (accept('|')) lhs = BooleanExpr::disjunction(std::move(lhs), parse_and());
    return lhs;
  }

  BooleanExpr parse_and() {
    BooleanExpr lhs = parse_not();
    while (accept('&')) lhs = BooleanExpr::conjunction(std::move(lhs), parse_not());
    return lhs;
  }

  BooleanExpr parse_not() {
    if (accept('!')) return BooleanExpr::negate(parse_not());
    return parse_atom();
  }

  BooleanExpr parse_atom() {
    skip_space();
    if (pos_ >= line_.text.size()) fail("unexpected end of expression");
    const char c = line_.text[pos_];
    if (c == '(') {
      ++pos_;
      BooleanExpr inner = parse_or();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (c == '0' || c == '1') {
      const std::size_t start = pos_++;
      if (pos_ < line_.text.size() && is_ident_char(line_.text[pos_])) {
        pos_ = start;
        fail("invalid literal");
      }
      return BooleanExpr::constant(c == '1');
    }
    if (is_ident_start(c)) {
      const std::size_t start = pos_;
      while (pos_ < line_.text.size() && is_ident_char(line_.text[pos_])) ++pos_;
      const std::string name = line_.text.substr(start, pos_ - start);
      auto it = index_.find(name);
      if (it == index_.end()) {
        it = index_.emplace(name, next_index_++).first;
        auto_declared_.push_back(name);
      }
      return BooleanExpr::variable(it->second);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < line_.text.size() && line_.text[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void skip_space() {
    while (pos_ < line_.text.size() && std::isspace(static_cast<unsigned char>(line_.text[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, line_.number, pos_ + 1); }

  const SourceLine& line_;
  std::size_t pos_;
  std::map<std::string, std::size_t, std::less<>>& index_;
  std::vector<std::string>& auto_declared_;
  std::size_t& next_index_;
};

bool is_header(std::string_view line) {
  const auto comma = line.find(',');
  if (comma == std::string_view::npos) return false;
  auto lower = [](std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  };
  return lower(trim(line.substr(0, comma))) == "targets" && lower(trim(line.substr(comma + 1))) == "factors";
}

}  // namespace

BooleanNetwork parse_bnet(std::istream& in) {
  std::vector<SourceLine> lines;
  std::string raw;
  std::size_t number = 0;
  bool saw_header = false;
  while (std::getline(in, raw)) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string_view t = trim(raw);
    if (t.empty() || t.front() == '#') continue;
    if (!saw_header) {
      if (!is_header(t)) throw ParseError("expected header 'targets, factors'", number, 1);
      saw_header = true;
      continue;
    }
    lines.push_back({number, raw});
  }
  if (!saw_header) throw ParseError("empty model file", number == 0 ? 1 : number, 1);
  if (lines.empty()) throw ParseError("model declares no nodes", number, 1);

  // First pass: declared targets in file order.
  std::vector<std::string> names;
  std::vector<std::size_t> expr_start;
  std::map<std::string, std::size_t, std::less<>> index;
  for (const SourceLine& line : lines) {
    const std::string& text = line.text;
    std::size_t pos = 0;
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size() || !is_ident_start(text[pos])) throw ParseError("expected node name", line.number, pos + 1);
    const std::size_t start = pos;
    while (pos < text.size() && is_ident_char(text[pos])) ++pos;
    std::string name = text.substr(start, pos - start);
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size() || text[pos] != ',') throw ParseError("expected ',' after node name", line.number, pos + 1);
    if (!index.emplace(name, names.size()).second) {
      throw ParseError("duplicate node name '" + name + "'", line.number, start + 1);
    }
    names.push_back(std::move(name));
    expr_start.push_back(pos + 1);
  }

  // Second pass: expressions; unknown identifiers become appended inputs.
  std::vector<std::string> auto_declared;
  std::size_t next_index = names.size();
  std::vector<BooleanExpr> predictors;
  predictors.reserve(names.size());
  for (std::size_t k = 0; k < lines.size(); ++k) {
    ExprParser parser(lines[k], expr_start[k], index, auto_declared, next_index);
    predictors.push_back(parser.parse());
  }
  for (const std::string& name : auto_declared) {
    predictors.push_back(BooleanExpr::variable(names.size()));
    names.push_back(name);
  }
  return BooleanNetwork(std::move(names), std::move(predictors));
}

BooleanNetwork parse_bnet(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_bnet(in);
}

BooleanNetwork load_bnet_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file '" + path + "'");
  return parse_bnet(in);
}

// ---------------------------------------------------------------------------
// Assignments

PartialAssignment parse_assignment(const BooleanNetwork& net, std::string_view text) {
  PartialAssignment out;
  std::string item;
  auto flush = [&] {
    const std::string_view t = trim(item);
    if (t.empty()) {
      item.clear();
      return;
    }
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected name=bit in '" + std::string(t) + "'");
    const std::string_view name = trim(t.substr(0, eq));
    const std::string_view bit = trim(t.substr(eq + 1));
    if (bit != "0" && bit != "1") throw ConfigError("bit for '" + std::string(name) + "' must be 0 or 1");
    const std::size_t idx = net.require_index(name);
    if (out.contains(idx)) throw ConfigError("node '" + std::string(name) + "' assigned twice");
    out.pin(idx, bit == "1");
    item.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ';') {
      flush();
    } else {
      item += c;
    }
  }
  flush();
  return out;
}

std::string format_assignment(const BooleanNetwork& net, const PartialAssignment& assignment) {
  std::string out;
  for (const auto& [node, value] : assignment.pins()) {
    if (!out.empty()) out += ',';
    out += net.name(node);
    out += value ? "=1" : "=0";
  }
  return out;
}

}  // namespace gattaca
