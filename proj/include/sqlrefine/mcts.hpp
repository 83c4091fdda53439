#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sqlrefine/agents.hpp"
#include "sqlrefine/sqlexec.hpp"
#include "sqlrefine/trace.hpp"

namespace sqlrefine {

struct RolloutConfig {
  int max_rollouts = 5;
  int child_count = 2;
  double exploration_c = 1.4142135623730951;  // sqrt(2)
  double epsilon = 1e-6;
  bool early_stop = false;
  int early_stop_reward = 90;
};

struct SearchNode {
  int id = 0;
  int parent = -1;  // -1 marks the root
  int depth = 0;
  std::string sql;
  std::string feedback;  // execution error, or verifier explanation, or empty
  std::string critique;  // the critique this node was refined from
  bool executed_ok = false;
  bool reward_fallback = false;
  std::vector<int> rewards;  // own evaluation scores, never propagated ones
  int visits = 0;
  double p_value = 0.0;
  std::vector<int> children;

  int max_reward() const;
};

/// Eq: P = (min(rewards) + mean(rewards)) / 2. Throws on an empty set.
double node_p_value(const std::vector<int>& rewards);

/// Eq: UCT = P + c * sqrt((ln(father_visits) + 1) / (visits + epsilon)).
double uct_value(double p, int father_visits, int visits, const RolloutConfig& config);

/// Nodes in creation order; node 0 is the root. Selection treats a node as
/// expandable while it has fewer than child_count children; the root's
/// "father visit count" is the total visit count of the tree.
class SearchTree {
 public:
  int add_root(std::string sql, std::string feedback, bool executed_ok, int reward,
               bool reward_fallback);
  int add_child(int parent, std::string sql, std::string feedback, bool executed_ok,
                std::string critique, int reward, bool reward_fallback);

  SearchNode& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const SearchNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const std::vector<SearchNode>& nodes() const { return nodes_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int total_visits() const;

  double uct(int id, const RolloutConfig& config) const;

  /// Highest-UCT expandable node, earliest id on ties; -1 when every node is
  /// fully expanded.
  int select(const RolloutConfig& config) const;

  /// Walks from the new child's parent to the root: every ancestor gains a
  /// visit, and P values recompute as (own P + best child P) / 2 for as long
  /// as the recomputation keeps changing values.
  void backpropagate(int child_id);

  /// Node with the highest own reward. Nodes that executed cleanly beat
  /// those that did not; remaining ties prefer smaller depth, then earlier
  /// creation.
  int best_node() const;

 private:
  std::vector<SearchNode> nodes_;
};

struct RootInfo {
  std::string sql;
  std::string feedback;  // execution error or verifier explanation
  bool executed_ok = false;
};

using SqlExecutor = std::function<ExecutionOutcome(const std::string&)>;

struct SearchOutcome {
  std::string best_sql;
  int best_node = 0;
  int best_reward = 0;
  bool degraded = false;  // no child was ever created
  int rollouts_used = 0;
  int children_created = 0;
  SearchTree tree;
};

/// Refinement search over a failing query: evaluates the root once, then for
/// each rollout selects a node, critiques and refines it, executes and
/// evaluates the refined SQL, and backpropagates. An agent parse failure
/// consumes the rollout without adding a child.
SearchOutcome run_search(const RootInfo& root, Agents& agents, const SqlExecutor& executor,
                         const QuestionContext& ctx, const RolloutConfig& config,
                         TraceSink* trace = nullptr);

}  // namespace sqlrefine
