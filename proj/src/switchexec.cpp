// Copyright 2026 the selfproof authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0

#include "selfproof/switchexec.hpp"

namespace selfproof {

namespace {
uint64_t time_words(const Machine& m) {
  return (m.regions().at(RegionId::Time).width() + m.spec().word_size - 1) / m.spec().word_size;
}
}  // namespace

CheckResult check_and_maybe_switch(SystemCtx& sys) {
  CheckResult res;
  Machine& m = sys.machine();
  const Theorem* last = sys.proof().last_live();
  if (!last) return res;
  auto t1 = is_target_theorem(last->formula, sys.mode());
  if (!t1) return res;
  res.t1 = *t1;
  sys.note(SysEvent::TargetFound, *t1, last->index);

  // Prewired feasibility subroutine: reading the clock costs time.
  uint64_t tw = time_words(m);
  sys.tick(1 + tw);
  if (sys.life_over()) {
    res.outcome = CheckOutcome::TooLate;
    return res;
  }
  uint64_t now = m.cycle();
  uint64_t needed = 1 + tw;  // set switchbit + one more time read
  if (*t1 <= now || *t1 - now <= needed) {
    res.outcome = CheckOutcome::TooLate;
    return res;
  }
  if (m.switch_latch_used()) {
    res.outcome = CheckOutcome::TooLate;
    return res;
  }
  if (sys.suppress_through() >= *t1) {
    res.outcome = CheckOutcome::Declined;
    return res;
  }

  m.set_switchbit();
  sys.note(SysEvent::SwitchbitSet, m.cycle());
  sys.tick(1);

  // Repeatedly test time until time > t1.
  while (!sys.life_over() && m.cycle() <= *t1) sys.tick(1);
  if (sys.life_over() && m.cycle() <= *t1) {
    res.outcome = CheckOutcome::TooLate;
    return res;
  }

  sys.note(SysEvent::ControlTransfer, m.cycle());
  res.exec = execute_switchprog(sys);
  res.outcome = CheckOutcome::Switched;
  return res;
}

SwitchExec execute_switchprog(SystemCtx& sys) {
  Machine& m = sys.machine();
  const Region& sw = m.regions().at(RegionId::SwitchProg);
  uint32_t word_size = m.spec().word_size;
  uint64_t p_before = fnv1a_str(bits_to_string(m.read_region(RegionId::P)));

  uint16_t header = m.word(RegionId::SwitchProg, 0);
  uint32_t nwrites = header & 0xff;
  bool resume = (header & 0x8000) != 0;
  if ((1 + 2 * static_cast<uint64_t>(nwrites)) * word_size > sw.width()) {
    m.clear_switchbit();
    return SwitchExec::Aborted;
  }

  JournalMark mark = m.mark();
  for (uint32_t i = 0; i < nwrites; ++i) {
    if (sys.life_over()) {
      sys.note(SysEvent::TruncatedRewrite, m.cycle());
      sys.disable_searcher();
      return SwitchExec::Truncated;
    }
    uint16_t addr = m.word(RegionId::SwitchProg, 1 + 2 * i);
    uint16_t value = m.word(RegionId::SwitchProg, 2 + 2 * i);
    uint32_t lo = (static_cast<uint32_t>(addr) - 1) * word_size + 1;
    if (addr == 0 || lo + word_size - 1 > m.regions().total_bits()) {
      m.rewind_to(mark);
      m.clear_switchbit();
      return SwitchExec::Aborted;
    }
    try {
      m.write_abs(lo, u64_to_bits(value, word_size), Actor::Switchprog);
    } catch (const IllegalWrite&) {
      m.rewind_to(mark);
      m.clear_switchbit();
      return SwitchExec::Aborted;
    }
    sys.tick(1);
  }

  uint64_t p_after = fnv1a_str(bits_to_string(m.read_region(RegionId::P)));
  sys.note(SysEvent::PRewrite, p_before ^ p_after);

  if (resume) {
    m.clear_switchbit();
    if (!sys.life_over()) sys.tick(1);
    return SwitchExec::Resumed;
  }
  sys.disable_searcher();
  return SwitchExec::Completed;
}

BitVec make_switchprog(const std::vector<std::pair<uint16_t, uint16_t>>& writes, bool resume,
                       uint32_t region_width) {
  std::vector<uint16_t> words;
  uint16_t header = static_cast<uint16_t>(writes.size() & 0xff);
  if (resume) header |= 0x8000;
  words.push_back(header);
  for (auto [a, v] : writes) {
    words.push_back(a);
    words.push_back(v);
  }
  BitVec out;
  for (uint16_t w : words) {
    BitVec b = u64_to_bits(w, 16);
    out.insert(out.end(), b.begin(), b.end());
  }
  out.resize(region_width, 0);
  return out;
}

}  // namespace selfproof
