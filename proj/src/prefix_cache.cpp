#include "sqlrefine/prefix_cache.hpp"

#include <algorithm>
#include <atomic>
#include <unordered_map>

#include "sqlrefine/errors.hpp"

namespace sqlrefine {

struct PrefixCache::Entry {
  std::vector<TokenId> key;
  SessionHandle handle;
  std::uint64_t created_at = 0;
  std::atomic<std::uint64_t> last_hit{0};
  std::atomic<std::uint64_t> hits{0};
};

struct PrefixCache::Node {
  std::unordered_map<TokenId, std::unique_ptr<Node>> children;
  Entry* entry = nullptr;
};

PrefixCache::PrefixCache(CacheConfig config)
    : config_(config), root_(std::make_unique<Node>()) {}

PrefixCache::~PrefixCache() = default;

std::optional<PrefixCache::Match> PrefixCache::lookup(std::span<const TokenId> probe) {
  if (!config_.enabled) return std::nullopt;
  bool found = false;
  Match m;
  {
    std::shared_lock lock(trie_mu_);
    std::uint64_t now = logical_time_.fetch_add(1) + 1;
    const Node* node = root_.get();
    Entry* best = nullptr;
    std::size_t depth = 0;
    for (TokenId token : probe) {
      auto it = node->children.find(token);
      if (it == node->children.end()) break;
      node = it->second.get();
      ++depth;
      if (node->entry) {
        best = node->entry;
        m.matched_tokens = depth;
      }
    }
    if (best) {
      best->last_hit.store(now);
      best->hits.fetch_add(1);
      m.handle = best->handle;
      found = true;
    }
  }
  {
    std::lock_guard<std::mutex> lock(stats_mu_);
    ++stats_.lookups;
    if (found) ++stats_.hits;
  }
  if (!found) return std::nullopt;
  return m;
}

void PrefixCache::insert(std::span<const TokenId> key, SessionHandle handle) {
  if (!config_.enabled) return;
  if (key.empty() || key.size() > config_.max_total_key_tokens) return;

  std::unique_lock lock(trie_mu_);
  std::uint64_t now = logical_time_.fetch_add(1) + 1;

  // Refresh in place when the key is already stored.
  Node* node = root_.get();
  for (TokenId token : key) {
    auto it = node->children.find(token);
    if (it == node->children.end()) {
      node = nullptr;
      break;
    }
    node = it->second.get();
  }
  if (node && node != root_.get() && node->entry) {
    node->entry->last_hit.store(now);
    if (handle) node->entry->handle = std::move(handle);
    return;
  }

  evict_until_fits_locked(key.size());

  node = root_.get();
  for (TokenId token : key) {
    auto& child = node->children[token];
    if (!child) child = std::make_unique<Node>();
    node = child.get();
  }
  if (node->entry) {
    node->entry->last_hit.store(now);
    if (handle) node->entry->handle = std::move(handle);
    return;
  }
  auto entry = std::make_unique<Entry>();
  entry->key.assign(key.begin(), key.end());
  entry->handle = std::move(handle);
  entry->created_at = now;
  entry->last_hit.store(now);
  node->entry = entry.get();
  key_tokens_ += key.size();
  entries_.push_back(std::move(entry));

  std::lock_guard<std::mutex> stats_lock(stats_mu_);
  ++stats_.insertions;
}

void PrefixCache::record_completion(std::size_t prompt_tokens, std::size_t tokens_saved) {
  if (tokens_saved > prompt_tokens) {
    throw Error("cache accounting: saved tokens exceed prompt tokens");
  }
  std::lock_guard<std::mutex> lock(stats_mu_);
  stats_.tokens_saved += tokens_saved;
  stats_.tokens_computed += prompt_tokens - tokens_saved;
}

CacheStats PrefixCache::stats() const {
  CacheStats out;
  {
    std::shared_lock lock(trie_mu_);
    out.entries = entries_.size();
    out.key_tokens = key_tokens_;
  }
  std::lock_guard<std::mutex> lock(stats_mu_);
  out.lookups = stats_.lookups;
  out.hits = stats_.hits;
  out.tokens_saved = stats_.tokens_saved;
  out.tokens_computed = stats_.tokens_computed;
  out.insertions = stats_.insertions;
  out.evictions = stats_.evictions;
  return out;
}

void PrefixCache::evict_until_fits_locked(std::size_t incoming_key_tokens) {
  std::size_t evicted = 0;
  while (!entries_.empty() &&
         (entries_.size() + 1 > config_.max_entries ||
          key_tokens_ + incoming_key_tokens > config_.max_total_key_tokens)) {
    auto victim = std::min_element(
        entries_.begin(), entries_.end(),
        [](const std::unique_ptr<Entry>& a, const std::unique_ptr<Entry>& b) {
          auto ka = std::make_pair(a->last_hit.load(), a->created_at);
          auto kb = std::make_pair(b->last_hit.load(), b->created_at);
          return ka < kb;
        });
    remove_entry_locked(victim->get());
    ++evicted;
  }
  if (evicted) {
    std::lock_guard<std::mutex> lock(stats_mu_);
    stats_.evictions += evicted;
  }
}

void PrefixCache::remove_entry_locked(Entry* entry) {
  std::vector<std::pair<Node*, TokenId>> path;  // (parent, edge token)
  Node* node = root_.get();
  for (TokenId token : entry->key) {
    path.emplace_back(node, token);
    node = node->children.at(token).get();
  }
  node->entry = nullptr;
  // Prune now-useless nodes bottom up.
  while (!path.empty()) {
    auto [parent, token] = path.back();
    path.pop_back();
    Node* child = parent->children.at(token).get();
    if (child->entry || !child->children.empty()) break;
    parent->children.erase(token);
  }
  key_tokens_ -= entry->key.size();
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const std::unique_ptr<Entry>& e) { return e.get() == entry; });
  entries_.erase(it);
}

CachedRunner::CachedRunner(ModelEndpoint& endpoint, PrefixCache& cache,
                           const Tokenizer& tokenizer, RunnerConfig config)
    : endpoint_(endpoint), cache_(cache), tokenizer_(tokenizer), config_(config) {}

Completion CachedRunner::run(const PromptParts& parts, const SamplingParams& params,
                             AgentRole role, AssembledPrompt* assembled_out) {
  AssembledPrompt prompt = assemble(parts, tokenizer_, config_.max_context_tokens);
  if (assembled_out) *assembled_out = prompt;
  std::size_t total = prompt.tokens.size();

  std::optional<PrefixCache::Match> match;
  if (cache_.enabled()) match = cache_.lookup(prompt.tokens);

  SessionHandle restore;
  if (match && match->handle && endpoint_.supports_sessions()) restore = match->handle;

  Completion completion = endpoint_.complete(prompt, params, role, restore);

  std::size_t saved = (cache_.enabled() && match) ? match->matched_tokens : 0;
  cache_.record_completion(total, saved);
  if (cache_.enabled() && total > 0) {
    std::size_t prefix_len = invariant_prefix_tokens(parts, tokenizer_);
    if (prefix_len > 0 && prefix_len < total) {
      SessionHandle prefix_handle =
          completion.session ? completion.session->slice(prefix_len) : nullptr;
      cache_.insert(std::span(prompt.tokens.data(), prefix_len), std::move(prefix_handle));
    }
    cache_.insert(prompt.tokens, completion.session);
  }
  return completion;
}

}  // namespace sqlrefine
