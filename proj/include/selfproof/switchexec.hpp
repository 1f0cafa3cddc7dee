// Copyright 2026 the selfproof authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "selfproof/systemctx.hpp"

namespace selfproof {

enum class CheckOutcome : uint8_t { NoTarget, TooLate, Declined, Switched };
enum class SwitchExec : uint8_t { None, Completed, Resumed, Aborted, Truncated };

struct CheckResult {
  CheckOutcome outcome = CheckOutcome::NoTarget;
  SwitchExec exec = SwitchExec::None;
  uint64_t t1 = 0;
};

// check(): target-theorem detection, prewired time-feasibility test,
// write-once switchbit, busy-wait past t1, control transfer to switchprog.
CheckResult check_and_maybe_switch(SystemCtx& sys);

// switchprog execution; callable only from a successful check. The program
// is a header word (write count, resume flag in bit 15) followed by
// (absolute word address, value) pairs. Each write costs one cycle.
SwitchExec execute_switchprog(SystemCtx& sys);

// Builds a switchprog image as region bits (for p(1) preloads and tests).
BitVec make_switchprog(const std::vector<std::pair<uint16_t, uint16_t>>& writes, bool resume,
                       uint32_t region_width);

}  // namespace selfproof
