// Copyright 2026 the selfproof authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "selfproof/systemctx.hpp"
#include "selfproof/technique.hpp"

#include <optional>
#include <string>

namespace selfproof {

enum class RunStatus : uint8_t { Running, Halted, Error, BudgetExhausted, Switched };

struct RunOutcome {
  RunStatus status = RunStatus::Running;
  uint64_t steps_used = 0;
  uint32_t proof_appended = 0;
  uint32_t proof_tombstoned = 0;
  std::string error;
};

// Resumable interpreter state for one technique test. Value type: forks of
// the surrounding system copy it mid-run and continue token by token.
class TechniqueRun {
 public:
  TechniqueRun() = default;
  TechniqueRun(Technique w, uint64_t budget);

  // Snapshots the life (journal mark, proof, environment) and resets proof
  // and scratch, per the test protocol.
  void begin(SystemCtx& sys);

  // Executes one instruction. Returns the status after the step; terminal
  // statuses stick.
  RunStatus step(SystemCtx& sys);

  // Exact undo of a non-switched run.
  void undo(SystemCtx& sys);

  bool active() const { return out_.status == RunStatus::Running; }
  const RunOutcome& outcome() const { return out_; }
  const Technique& technique() const { return w_; }
  uint64_t budget() const { return budget_; }
  uint64_t steps_used() const { return out_.steps_used; }

  uint64_t sig() const;

 private:
  RunStatus fail(const std::string& why);
  // Charges `cost` steps; false (-> BudgetExhausted) if it would overflow.
  bool charge(uint64_t cost);

  Technique w_;
  std::vector<Instr> instrs_;
  uint64_t budget_ = 0;
  size_t pc_ = 0;
  uint64_t acc_ = 0;
  bool begun_ = false;
  SystemCtx::LifeMark mark_;
  RunOutcome out_;
};

// Convenience driver: begin + step to completion (or switch).
RunOutcome run_technique(const Technique& w, uint64_t budget, SystemCtx& sys);

// The per-instruction step cost in interpreter steps: the instruction's token
// span, plus the produced theorem's size for proof-growing instructions, plus
// the horizon-dependent evaluation surcharge for utility-unfolding.
uint64_t unfold_surcharge(uint64_t now, uint64_t horizon);

}  // namespace selfproof
