#include "sqlrefine/mcts.hpp"

#include <algorithm>
#include <cmath>

#include "sqlrefine/errors.hpp"

namespace sqlrefine {

namespace {

double round6(double x) { return std::round(x * 1e6) / 1e6; }

}  // namespace

int SearchNode::max_reward() const {
  return *std::max_element(rewards.begin(), rewards.end());
}

double node_p_value(const std::vector<int>& rewards) {
  if (rewards.empty()) throw Error("p-value over an empty reward set");
  int min = rewards[0];
  double sum = 0.0;
  for (int r : rewards) {
    min = std::min(min, r);
    sum += r;
  }
  double mean = sum / static_cast<double>(rewards.size());
  return 0.5 * (static_cast<double>(min) + mean);
}

double uct_value(double p, int father_visits, int visits, const RolloutConfig& config) {
  double explore = std::sqrt((std::log(static_cast<double>(father_visits)) + 1.0) /
                             (static_cast<double>(visits) + config.epsilon));
  return p + config.exploration_c * explore;
}

int SearchTree::add_root(std::string sql, std::string feedback, bool executed_ok,
                         int reward, bool reward_fallback) {
  if (!nodes_.empty()) throw Error("search tree already has a root");
  SearchNode node;
  node.id = 0;
  node.sql = std::move(sql);
  node.feedback = std::move(feedback);
  node.executed_ok = executed_ok;
  node.rewards = {reward};
  node.reward_fallback = reward_fallback;
  node.visits = 1;
  node.p_value = node_p_value(node.rewards);
  nodes_.push_back(std::move(node));
  return 0;
}

int SearchTree::add_child(int parent, std::string sql, std::string feedback,
                          bool executed_ok, std::string critique, int reward,
                          bool reward_fallback) {
  SearchNode node;
  node.id = size();
  node.parent = parent;
  node.depth = nodes_[static_cast<std::size_t>(parent)].depth + 1;
  node.sql = std::move(sql);
  node.feedback = std::move(feedback);
  node.critique = std::move(critique);
  node.executed_ok = executed_ok;
  node.rewards = {reward};
  node.reward_fallback = reward_fallback;
  node.visits = 1;
  node.p_value = node_p_value(node.rewards);
  nodes_[static_cast<std::size_t>(parent)].children.push_back(node.id);
  nodes_.push_back(std::move(node));
  return size() - 1;
}

int SearchTree::total_visits() const {
  int n = 0;
  for (const auto& node : nodes_) n += node.visits;
  return n;
}

double SearchTree::uct(int id, const RolloutConfig& config) const {
  const SearchNode& n = node(id);
  int father_visits =
      n.parent >= 0 ? node(n.parent).visits : total_visits();
  return uct_value(n.p_value, father_visits, n.visits, config);
}

int SearchTree::select(const RolloutConfig& config) const {
  int best = -1;
  double best_uct = 0.0;
  for (const auto& n : nodes_) {
    if (static_cast<int>(n.children.size()) >= config.child_count) continue;
    double u = uct(n.id, config);
    if (best == -1 || u > best_uct) {
      best = n.id;
      best_uct = u;
    }
  }
  return best;
}

void SearchTree::backpropagate(int child_id) {
  bool p_changed = true;
  int current = node(child_id).parent;
  while (current >= 0) {
    SearchNode& n = node(current);
    n.visits += 1;
    if (p_changed) {
      double best_child = 0.0;
      bool first = true;
      for (int c : n.children) {
        double p = node(c).p_value;
        if (first || p > best_child) {
          best_child = p;
          first = false;
        }
      }
      double updated = 0.5 * (n.p_value + best_child);
      p_changed = updated != n.p_value;
      n.p_value = updated;
    }
    current = n.parent;
  }
}

int SearchTree::best_node() const {
  int best = 0;
  for (const auto& n : nodes_) {
    if (n.id == 0) continue;
    const SearchNode& incumbent = node(best);
    auto key = [](const SearchNode& x) {
      return std::make_tuple(x.executed_ok ? 1 : 0, x.max_reward(), -x.depth, -x.id);
    };
    if (key(n) > key(incumbent)) best = n.id;
  }
  return best;
}

SearchOutcome run_search(const RootInfo& root, Agents& agents, const SqlExecutor& executor,
                         const QuestionContext& ctx, const RolloutConfig& config,
                         TraceSink* trace) {
  SearchOutcome outcome;
  SearchTree& tree = outcome.tree;

  RewardScore root_score = agents.evaluate(ctx, root.sql, root.feedback);
  tree.add_root(root.sql, root.feedback, root.executed_ok, root_score.value,
                root_score.fallback_used);
  if (trace) {
    trace->emit({{"type", "root_init"},
                 {"node", 0},
                 {"reward", root_score.value},
                 {"p_value", tree.node(0).p_value},
                 {"executed_ok", root.executed_ok}});
  }

  for (int rollout = 0; rollout < config.max_rollouts; ++rollout) {
    outcome.rollouts_used = rollout + 1;
    int target = tree.select(config);
    if (target < 0) {
      if (trace) trace->emit({{"type", "search_exhausted"}, {"rollout", rollout}});
      outcome.rollouts_used = rollout;
      break;
    }
    if (trace) {
      trace->emit({{"type", "select"},
                   {"rollout", rollout},
                   {"node", target},
                   {"uct", round6(tree.uct(target, config))}});
    }
    SearchNode& parent = tree.node(target);
    std::string parent_sql = parent.sql;
    std::string parent_feedback = parent.feedback;

    Result<std::string> critique = agents.critique(ctx, parent_sql, parent_feedback);
    if (!critique) {
      if (trace) {
        trace->emit({{"type", "expand_failed"},
                     {"rollout", rollout},
                     {"node", target},
                     {"stage", "critique"},
                     {"error", critique.error()}});
      }
      continue;
    }
    Result<GenerationResult> refined =
        agents.refine(ctx, parent_sql, parent_feedback, critique.value());
    if (!refined) {
      if (trace) {
        trace->emit({{"type", "expand_failed"},
                     {"rollout", rollout},
                     {"node", target},
                     {"stage", "refine"},
                     {"error", refined.error()}});
      }
      continue;
    }

    ExecutionOutcome executed = executor(refined.value().sql);
    RewardScore score =
        agents.evaluate(ctx, refined.value().sql, executed.error.value_or(""));
    int child = tree.add_child(target, refined.value().sql,
                               executed.error.value_or(""), executed.ok(),
                               critique.value(), score.value, score.fallback_used);
    ++outcome.children_created;
    if (trace) {
      trace->emit({{"type", "expand"},
                   {"rollout", rollout},
                   {"parent", target},
                   {"node", child},
                   {"reward", score.value},
                   {"executed_ok", executed.ok()},
                   {"p_value", tree.node(child).p_value}});
    }
    tree.backpropagate(child);
    if (trace) {
      nlohmann::ordered_json path = nlohmann::ordered_json::array();
      int current = tree.node(child).parent;
      while (current >= 0) {
        const SearchNode& n = tree.node(current);
        path.push_back({{"node", n.id}, {"visits", n.visits}, {"p_value", n.p_value}});
        current = n.parent;
      }
      trace->emit({{"type", "backprop"}, {"rollout", rollout}, {"path", path}});
    }

    if (config.early_stop && executed.ok() && score.value >= config.early_stop_reward) {
      Result<Verdict> verdict = agents.verify(ctx, refined.value().sql);
      if (verdict && verdict.value().accepted) {
        if (trace) {
          trace->emit({{"type", "early_stop"}, {"rollout", rollout}, {"node", child}});
        }
        break;
      }
      if (verdict && !verdict.value().accepted) {
        tree.node(child).feedback = verdict.value().explanation;
      }
    }
  }

  int best = tree.best_node();
  outcome.degraded = outcome.children_created == 0;
  outcome.best_node = outcome.degraded ? 0 : best;
  outcome.best_sql = tree.node(outcome.best_node).sql;
  outcome.best_reward = tree.node(outcome.best_node).max_reward();
  if (trace) {
    trace->emit({{"type", "search_result"},
                 {"best_node", outcome.best_node},
                 {"best_reward", outcome.best_reward},
                 {"degraded", outcome.degraded},
                 {"rollouts_used", outcome.rollouts_used},
                 {"children_created", outcome.children_created}});
  }
  return outcome;
}

}  // namespace sqlrefine
