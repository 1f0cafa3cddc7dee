// Copyright 2026 the selfproof authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0

#include "selfproof/scheduler.hpp"

namespace selfproof {

namespace {
unsigned __int128 pow_u128(unsigned __int128 base, size_t exp) {
  unsigned __int128 r = 1;
  for (size_t i = 0; i < exp; ++i) r *= base;
  return r;
}

Rat rat_from_u128(unsigned __int128 v) {
  uint64_t hi = static_cast<uint64_t>(v >> 64);
  uint64_t lo = static_cast<uint64_t>(v);
  Rat r(BigInt(hi));
  r *= Rat(BigInt(1) << 64);
  r += Rat(BigInt(lo));
  return r;
}
}  // namespace

size_t BiopsSearch::max_len_for_phase(uint32_t i) {
  if (i >= 128) i = 127;
  unsigned __int128 lim = static_cast<unsigned __int128>(1) << i;
  size_t l = 0;
  unsigned __int128 p = 1;
  while (l < 34) {
    p *= kAlphabetSize;
    if (p > lim) break;
    ++l;
  }
  return l;
}

uint64_t BiopsSearch::budget_for(uint32_t i, uint64_t scale, size_t len) {
  if (i >= 120 || len > 33) return 0;
  unsigned __int128 denom = pow_u128(kAlphabetSize, len);
  unsigned __int128 num = (static_cast<unsigned __int128>(1) << i) * scale;
  if (denom > num) return 0;
  unsigned __int128 b = num / denom;
  const unsigned __int128 cap = ~static_cast<uint64_t>(0);
  return b > cap ? ~static_cast<uint64_t>(0) : static_cast<uint64_t>(b);
}

BiopsSearch::BiopsSearch(SearchConfig cfg) : cfg_(cfg) {
  phase_ = cfg_.first_phase == 0 ? 1 : cfg_.first_phase;
  open_phase();
}

void BiopsSearch::open_phase() {
  capacity_ += (static_cast<unsigned __int128>(1) << phase_) * cfg_.scale;
  pass_ = (cfg_.freeze_mode && !frozen_.empty()) ? 0 : 1;
  if (pass_ == 0) {
    Technique prefix = frozen_.back();
    if (!prefix.empty() && prefix.back() == kTokHalt) prefix.pop_back();
    pass_prefix_len_ = prefix.size();
    enum_.emplace(max_len_for_phase(phase_), std::move(prefix));
  } else {
    pass_prefix_len_ = 0;
    enum_.emplace(max_len_for_phase(phase_));
  }
}

// Moves to the next pass or phase. Returns false when the schedule is out of
// phases.
bool BiopsSearch::next_pass() {
  if (pass_ == 0) {
    pass_ = 1;
    pass_prefix_len_ = 0;
    enum_.emplace(max_len_for_phase(phase_));
    return true;
  }
  if (phase_ >= cfg_.max_phase) return false;
  ++phase_;
  open_phase();
  return true;
}

Rat BiopsSearch::capacity() const { return rat_from_u128(capacity_); }

BiopsSearch::Status BiopsSearch::step_one(SystemCtx& sys) {
  if (status_ != Status::Running) return status_;
  if (sys.life_over()) {
    if (active_) {
      active_.reset();  // life ended mid-run; state stands
    }
    status_ = Status::Exhausted;
    return status_;
  }
  if (consumed_ >= cfg_.deadline_steps) {
    if (active_ && active_->active()) {
      active_->undo(sys);
    }
    active_.reset();
    status_ = Status::Exhausted;
    return status_;
  }

  if (!active_) {
    // Bookkeeping unit: fetch the next candidate (or advance the schedule).
    auto w = enum_->next();
    if (!w) {
      if (!next_pass()) status_ = Status::Exhausted;
      return status_;
    }
    size_t prior_len = w->size() - pass_prefix_len_;  // suffix length in pass 0
    uint32_t budget_phase = pass_ == 0 ? phase_ - 1 : (cfg_.freeze_mode && !frozen_.empty() ? phase_ - 1 : phase_);
    uint64_t budget = budget_for(budget_phase, cfg_.scale, prior_len);
    if (budget == 0) return status_;
    TechStats& st = stats_[technique_hash(*w)];
    st.granted_budget += budget;
    st.runs += 1;
    st.length = w->size();
    active_.emplace(*w, budget);
    active_->begin(sys);
    return status_;
  }

  uint64_t before = active_->steps_used();
  RunStatus rs = active_->step(sys);
  consumed_ += active_->steps_used() - before;

  switch (rs) {
    case RunStatus::Running: return status_;
    case RunStatus::Switched:
      switched_ = active_->technique();
      active_.reset();
      status_ = Status::Switched;
      return status_;
    case RunStatus::Halted: {
      TechStats& st = stats_[technique_hash(active_->technique())];
      if (st.first_completion_steps == 0) {
        st.first_completion_steps = consumed_;
        st.first_completion_f = active_->steps_used();
        st.first_completion_phase = phase_;
      }
      active_->undo(sys);
      active_.reset();
      return status_;
    }
    case RunStatus::Error:
    case RunStatus::BudgetExhausted:
      if (sys.life_over()) {
        active_.reset();
        status_ = Status::Exhausted;
        return status_;
      }
      active_->undo(sys);
      active_.reset();
      return status_;
  }
  return status_;
}

uint64_t BiopsSearch::sig() const {
  uint64_t h = fnv1a(&phase_, sizeof(phase_));
  h = fnv1a(&pass_, sizeof(pass_), h);
  h = fnv1a(&consumed_, sizeof(consumed_), h);
  uint8_t st = static_cast<uint8_t>(status_);
  h = fnv1a(&st, 1, h);
  if (enum_) {
    uint64_t es = enum_->sig();
    h = fnv1a(&es, sizeof(es), h);
  }
  if (active_) {
    uint64_t as = active_->sig();
    h = fnv1a(&as, sizeof(as), h);
  }
  for (const auto& f : frozen_) h = fnv1a(f.data(), f.size(), h);
  return h;
}

}  // namespace selfproof
