// Copyright 2026 the selfproof authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "selfproof/environments.hpp"
#include "selfproof/machine.hpp"
#include "selfproof/proof.hpp"

#include <cstdint>

namespace selfproof {

// Trace-visible events emitted by the VM / switch executor through the
// system context. The harness maps these onto trace records.
enum class SysEvent : uint8_t {
  TheoremAppended,
  TheoremDeleted,
  TargetFound,
  SwitchbitSet,
  ControlTransfer,
  PRewrite,
  TruncatedRewrite,
};

// Everything a running technique (and check()) may touch. Implemented by the
// harness LifeRunner and by leaner test fixtures.
class SystemCtx {
 public:
  virtual ~SystemCtx() = default;

  virtual Machine& machine() = 0;
  virtual Proof& proof() = 0;
  virtual const AxiomScheme& scheme() const = 0;
  virtual ModelCtx& live_model() = 0;
  virtual TargetMode mode() const = 0;

  // Advances the machine and environment together; saturates at the lifetime
  // (after which life_over() is true). The policy executes on every cycle.
  virtual void tick(uint64_t n) = 0;
  virtual bool life_over() const = 0;

  // Hypothetical-branch suppression for no-switch simulations: check() must
  // decline any commit with t1 <= suppress_through().
  virtual uint64_t suppress_through() const { return 0; }

  // Exact branch utilities at t1, evaluated from the current state with the
  // target theorem already appended. False when unavailable.
  virtual bool unfold_branches(uint64_t t1, bool relaxed, Rat& u_switch, Rat& u_continue) = 0;

  // Whole-life snapshot for exact undo of technique runs.
  struct LifeMark {
    JournalMark mach;
    EnvRuntime env;
    Rat cum_reward;
    size_t reward_hist_len = 0;
    Proof proof;
  };
  virtual LifeMark life_mark() = 0;
  virtual void life_rewind(const LifeMark& m) = 0;

  // After a completed non-resuming switch the searcher stops for good.
  virtual void disable_searcher() {}

  virtual void note(SysEvent, uint64_t a = 0, uint64_t b = 0) {}
};

}  // namespace selfproof
