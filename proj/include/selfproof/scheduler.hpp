// Copyright 2026 the selfproof authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "selfproof/technique_vm.hpp"

#include <map>
#include <optional>

namespace selfproof {

struct SearchConfig {
  uint64_t scale = 64;           // uniform budget multiplier (bias constant)
  uint64_t deadline_steps = 1ull << 40;
  bool freeze_mode = false;
  uint32_t first_phase = 1;
  uint32_t max_phase = 56;       // 2^56 * scale stays inside 128-bit math
};

// Per-technique instrumentation, keyed by token hash.
struct TechStats {
  uint64_t granted_budget = 0;      // sum of budgets over all phases
  uint64_t runs = 0;
  uint64_t first_completion_steps = 0;  // consumed steps when first halted
  uint64_t first_completion_f = 0;      // that run's own step count
  uint32_t first_completion_phase = 0;
  size_t length = 0;
};

// Method-style phase-doubling search: in phase i every technique with
// P(w) >= 2^-i runs for floor(2^i * P(w) * scale) steps, in lexicographic
// order, with exact undo after every non-switching run. check() is the only
// early exit. Value type; copies snapshot the full cursor.
class BiopsSearch {
 public:
  enum class Status : uint8_t { Running, Switched, Exhausted };

  explicit BiopsSearch(SearchConfig cfg);

  // Performs one unit of work: one technique step, or one piece of
  // enumeration bookkeeping. Exactly one technique step is counted against
  // the deadline per executing call.
  Status step_one(SystemCtx& sys);

  Status status() const { return status_; }
  uint64_t consumed_steps() const { return consumed_; }
  uint32_t phase() const { return phase_; }
  Rat capacity() const;  // nominal schedule capacity: sum of 2^i * scale
  const std::map<uint64_t, TechStats>& stats() const { return stats_; }
  const std::optional<TechniqueRun>& active() const { return active_; }
  std::optional<Technique> switched_technique() const { return switched_; }

  // Freeze-and-reuse: frozen techniques are read-only; in freeze mode half
  // of each phase's budget goes to continuations of the most recent one.
  void freeze(const Technique& w) { frozen_.push_back(w); }
  const std::vector<Technique>& frozen() const { return frozen_; }
  bool overwrite_frozen(size_t, const Technique&) { return false; }
  bool tombstone_frozen(size_t) { return false; }

  uint64_t sig() const;

  // Largest technique length eligible in phase i: 12^l <= 2^i.
  static size_t max_len_for_phase(uint32_t i);
  // floor(2^i * scale / 12^l); 0 when the technique is not eligible.
  static uint64_t budget_for(uint32_t i, uint64_t scale, size_t len);

 private:
  void open_phase();
  bool next_pass();

  SearchConfig cfg_;
  Status status_ = Status::Running;
  uint32_t phase_ = 0;
  int pass_ = 1;  // 0 = frozen-extension pass, 1 = fresh pass
  std::optional<TechniqueEnumerator> enum_;
  size_t pass_prefix_len_ = 0;
  std::optional<TechniqueRun> active_;
  std::optional<Technique> switched_;
  uint64_t consumed_ = 0;
  unsigned __int128 capacity_ = 0;
  std::vector<Technique> frozen_;
  std::map<uint64_t, TechStats> stats_;
};

}  // namespace selfproof
