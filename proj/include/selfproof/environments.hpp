// Copyright 2026 the selfproof authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "selfproof/formula.hpp"
#include "selfproof/machine.hpp"
#include "selfproof/rational.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace selfproof {

// ---------------------------------------------------------------------------
// Environment definitions
// ---------------------------------------------------------------------------

// One row outcome of the finite transition relation. Probabilities within a
// row are rational and sum to 1. `x_input` is delivered only when the machine
// requested input on the previous cycle.
struct EnvOutcome {
  Rat prob;
  uint32_t next_state = 0;
  std::optional<uint16_t> x_input;
  Rat reward;
};

// An optional per-cycle reward rule keyed on the content of the x region
// after input delivery: if x's leading bits match `pattern`, `amount` is
// added to the cycle's reward. Lets reward axioms talk about input patterns.
struct PatternBonus {
  std::string pattern;  // bits, matched against x starting at its first bit
  Rat amount;
};

struct TableEnv {
  uint32_t n_states = 1;
  uint32_t initial_state = 0;
  // rows[(state, action)] -> outcomes; missing -> default_row or no-op.
  std::map<std::pair<uint32_t, uint32_t>, std::vector<EnvOutcome>> rows;
  std::optional<std::vector<EnvOutcome>> default_row;
  std::optional<PatternBonus> bonus;
  // Declares that configs pairing this environment always run an
  // input-requesting policy; gates the per-cycle input-probability axioms,
  // which are false on cycles without a pending request.
  bool assume_always_request = false;
};

// Graph-tour environment: actions move along a small weighted graph; the only
// reward arrives on the final cycle and equals 1 / (shortest closed tour
// found). The current best length is reported through x on request.
struct TourEnv {
  uint32_t n_nodes = 0;
  uint32_t start_node = 0;
  std::vector<std::vector<uint32_t>> dist;  // 0 = no edge
};

struct EnvSpec {
  enum class Kind : uint8_t { Table, Tour } kind = Kind::Table;
  TableEnv table;
  TourEnv tour;

  static EnvSpec lever();                      // +1 per cycle while action==1
  static EnvSpec flat(Rat per_cycle_reward);   // unconditional reward (tie fixture)
  static EnvSpec coin_lever();                 // press -> {1/2:+2, 1/2:+1}
  static EnvSpec input_pattern_reward();       // request -> {1/2 x='11..' +3, 1/2 x='00..'}
  static EnvSpec gate(uint32_t max_wait);      // gate opens w.p. 1/2 per cycle
};

// Runtime state of an environment inside a life. Value type.
struct EnvRuntime {
  uint32_t state = 0;
  // Tour bookkeeping.
  uint32_t tour_node = 0;
  uint32_t tour_visited = 0;
  uint32_t tour_len = 0;
  uint32_t tour_best = 0;  // 0 = none found

  void reset(const EnvSpec& spec);
  // Distribution of the next cycle given the machine's current action
  // (low 4 bits of y) and the cycle that is about to complete. Outcomes with
  // identical (next_state, x_input) are merged, rewards averaged — exact by
  // linearity of expectation.
  std::vector<EnvOutcome> dist(const EnvSpec& spec, uint32_t action, uint64_t completing_cycle,
                               uint64_t horizon) const;
  // Applies the chosen outcome's state transition (machine-side effects are
  // the caller's job). Tour environments also fold the action in here.
  void apply(const EnvSpec& spec, const EnvOutcome& o, uint32_t action);

  uint64_t sig() const;
};

// Extra per-cycle reward from the pattern bonus, given post-input x bits.
Rat pattern_bonus_reward(const EnvSpec& spec, const BitVec& x_bits);

// ---------------------------------------------------------------------------
// Axiomatization (families consumed by the axiom scheme)
// ---------------------------------------------------------------------------

// Reward axioms: per-row and pattern reward rules as bounded formulas.
std::vector<FormulaPtr> reward_axioms(const EnvSpec& spec, const RegionTable& regions,
                                      uint64_t horizon);
// Environment axioms: transition rows as probability statements about the
// next cycle's x content, conditioned on the current action.
std::vector<FormulaPtr> environment_axioms(const EnvSpec& spec, const RegionTable& regions,
                                           uint64_t horizon);

// ---------------------------------------------------------------------------
// Exact expectation engines
// ---------------------------------------------------------------------------
//
// Both engines drive forkable deterministic systems by path replay: each path
// re-runs a clone of the base system from its current point with a choice
// script; the script grows depth-first over the (merged) stochastic choice
// points. Sim requirements:
//   Sim clone() const;
//   Rat cum_reward() const;
//   void run_sim_path(PathChooser& pc);   // to life end or chooser abort
//
// `path_expectation` enumerates complete paths (the proof kernel's
// utility-unfolding route). `UtilityOracle` composes subtree values with
// memoization at choice points (the independent brute-force oracle route).
// Both are exact over rationals and must agree; tests rely on that.

enum class PathMode : uint8_t { Enumerate, Oracle };

struct PathChooser {
  PathMode mode = PathMode::Enumerate;
  std::vector<size_t> script;
  const std::unordered_map<uint64_t, Rat>* memo = nullptr;

  // Per-run recordings.
  size_t depth = 0;
  std::vector<std::vector<Rat>> probs;  // distribution at each visited choice
  bool memo_hit = false;
  bool expand = false;  // oracle mode: unscripted, unmemoized choice reached
  uint64_t stop_sig = 0;
  Rat stop_tail;
  Rat cum_at_stop;

  // Returns the outcome index, or nullopt to abort the run.
  std::optional<size_t> choose(const std::vector<EnvOutcome>& outcomes, uint64_t sig,
                               const Rat& cum_now) {
    if (probs.size() <= depth) {
      probs.resize(depth + 1);
      std::vector<Rat> p;
      for (const auto& o : outcomes) p.push_back(o.prob);
      probs[depth] = std::move(p);
    }
    if (depth < script.size()) return script[depth++];
    if (mode == PathMode::Oracle) {
      if (memo) {
        auto it = memo->find(sig);
        if (it != memo->end()) {
          memo_hit = true;
          stop_sig = sig;
          stop_tail = it->second;
          cum_at_stop = cum_now;
          return std::nullopt;
        }
      }
      expand = true;
      stop_sig = sig;
      cum_at_stop = cum_now;
      return std::nullopt;
    }
    script.push_back(0);
    ++depth;
    return 0;
  }
};

// Thrown by the sim when the chooser aborts; the clone is discarded.
struct SimAbortSignal {};

// Expected reward from `base`'s current point to the end of life, by complete
// path enumeration.
template <typename Sim>
Rat path_expectation(const Sim& base) {
  Rat total = 0;
  std::vector<size_t> script;
  for (;;) {
    Sim fork = base.clone();
    PathChooser pc;
    pc.mode = PathMode::Enumerate;
    pc.script = script;
    fork.run_sim_path(pc);
    Rat prob = 1;
    for (size_t d = 0; d < pc.script.size(); ++d) prob *= pc.probs[d][pc.script[d]];
    total += prob * (fork.cum_reward() - base.cum_reward());
    script = pc.script;
    while (!script.empty() && script.back() + 1 >= pc.probs[script.size() - 1].size())
      script.pop_back();
    if (script.empty()) return total;
    ++script.back();
  }
}

template <typename Sim>
class UtilityOracle {
 public:
  Rat expected_total(const Sim& base) { return walk(base, {}); }
  const std::unordered_map<uint64_t, Rat>& memo() const { return memo_; }

 private:
  Rat walk(const Sim& base, std::vector<size_t> script) {
    Sim fork = base.clone();
    PathChooser pc;
    pc.mode = PathMode::Oracle;
    pc.script = std::move(script);
    pc.memo = &memo_;
    fork.run_sim_path(pc);
    if (pc.memo_hit) return (pc.cum_at_stop - base.cum_reward()) + pc.stop_tail;
    if (!pc.expand) return fork.cum_reward() - base.cum_reward();
    Rat prefix = pc.cum_at_stop - base.cum_reward();
    const auto& probs = pc.probs[pc.script.size()];
    Rat v = 0;
    for (size_t k = 0; k < probs.size(); ++k) {
      std::vector<size_t> child = pc.script;
      child.push_back(k);
      v += probs[k] * walk(base, std::move(child));
    }
    memo_.emplace(pc.stop_sig, v - prefix);
    return v;
  }

  std::unordered_map<uint64_t, Rat> memo_;
};

}  // namespace selfproof
