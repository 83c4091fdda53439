#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "sqlrefine/model.hpp"
#include "sqlrefine/tokenizer.hpp"

namespace sqlrefine {

struct CacheConfig {
  bool enabled = true;
  std::size_t max_entries = 64;
  std::size_t max_total_key_tokens = 1'000'000;
};

/// Counters exposed in reports. tokens_saved + tokens_computed always equals
/// the prompt tokens of every successful completion routed through the
/// cache, whatever mode it ran in.
struct CacheStats {
  std::uint64_t lookups = 0;
  std::uint64_t hits = 0;
  std::uint64_t tokens_saved = 0;
  std::uint64_t tokens_computed = 0;
  std::uint64_t insertions = 0;
  std::uint64_t evictions = 0;
  std::size_t entries = 0;
  std::size_t key_tokens = 0;

  double hit_rate() const {
    return lookups ? static_cast<double>(hits) / static_cast<double>(lookups) : 0.0;
  }
};

/// Token-prefix cache over prompt token ids. Keys live in a trie, so a
/// lookup returns the longest stored key that prefixes the probe in one walk.
/// Eviction is LRU by last hit (creation time breaks ties), triggered when
/// either the entry count or the summed key length would exceed its cap.
/// Time is a logical counter, not wall time. Lookups may run concurrently;
/// inserts are exclusive.
class PrefixCache {
 public:
  explicit PrefixCache(CacheConfig config = {});
  ~PrefixCache();

  PrefixCache(const PrefixCache&) = delete;
  PrefixCache& operator=(const PrefixCache&) = delete;

  struct Match {
    std::size_t matched_tokens = 0;
    SessionHandle handle;  // null when the entry was stored without state
  };

  /// Longest stored key that is a prefix of probe. Updates that entry's
  /// recency. Counts one lookup (and a hit when found).
  std::optional<Match> lookup(std::span<const TokenId> probe);

  /// Stores key -> handle, evicting least recently hit entries first to stay
  /// within capacity. Re-inserting an existing key refreshes its recency and
  /// handle without creating an entry. Empty or over-capacity keys are
  /// ignored. No-op when the cache is disabled.
  void insert(std::span<const TokenId> key, SessionHandle handle);

  /// Accounts a successful completion of prompt_tokens total tokens of which
  /// tokens_saved came from a cached prefix.
  void record_completion(std::size_t prompt_tokens, std::size_t tokens_saved);

  bool enabled() const { return config_.enabled; }
  CacheStats stats() const;

 private:
  struct Node;
  struct Entry;

  void evict_until_fits_locked(std::size_t incoming_key_tokens);
  void remove_entry_locked(Entry* entry);

  CacheConfig config_;

  mutable std::shared_mutex trie_mu_;
  std::unique_ptr<Node> root_;
  std::vector<std::unique_ptr<Entry>> entries_;
  std::size_t key_tokens_ = 0;
  std::atomic<std::uint64_t> logical_time_{0};

  mutable std::mutex stats_mu_;
  CacheStats stats_;
};

struct RunnerConfig {
  std::size_t max_context_tokens = 32168;
};

/// Assembles prompt parts, consults the cache, calls the endpoint and stores
/// what the call just prefilled: an entry for the invariant prefix (schema
/// plus few-shot) and one for the full prompt. When the endpoint cannot
/// restore sessions the cache still measures what a session-capable backend
/// would have saved, while Completion.prefill_tokens_computed stays honest.
/// A throwing completion leaves the cache untouched.
class CachedRunner {
 public:
  CachedRunner(ModelEndpoint& endpoint, PrefixCache& cache, const Tokenizer& tokenizer,
               RunnerConfig config = {});

  /// assembled_out, when given, receives the assembled prompt.
  Completion run(const PromptParts& parts, const SamplingParams& params, AgentRole role,
                 AssembledPrompt* assembled_out = nullptr);

  PrefixCache& cache() { return cache_; }
  ModelEndpoint& endpoint() { return endpoint_; }
  const Tokenizer& tokenizer() const { return tokenizer_; }

 private:
  ModelEndpoint& endpoint_;
  PrefixCache& cache_;
  const Tokenizer& tokenizer_;
  RunnerConfig config_;
};

}  // namespace sqlrefine
