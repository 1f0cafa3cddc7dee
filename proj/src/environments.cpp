// Copyright 2026 the selfproof authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0

#include "selfproof/environments.hpp"

#include <algorithm>

namespace selfproof {

EnvSpec EnvSpec::lever() {
  EnvSpec e;
  e.table.n_states = 1;
  e.table.rows[{0, 1}] = {{Rat(1), 0, std::nullopt, Rat(1)}};
  e.table.default_row = std::vector<EnvOutcome>{{Rat(1), 0, std::nullopt, Rat(0)}};
  return e;
}

EnvSpec EnvSpec::flat(Rat per_cycle_reward) {
  EnvSpec e;
  e.table.n_states = 1;
  e.table.default_row = std::vector<EnvOutcome>{{Rat(1), 0, std::nullopt, per_cycle_reward}};
  return e;
}

EnvSpec EnvSpec::coin_lever() {
  EnvSpec e;
  e.table.n_states = 1;
  // Same successor state and no input: the two outcomes merge into one with
  // the exact mean reward 3/2, so simulation stays deterministic.
  e.table.rows[{0, 1}] = {{Rat(1, 2), 0, std::nullopt, Rat(2)},
                          {Rat(1, 2), 0, std::nullopt, Rat(1)}};
  e.table.default_row = std::vector<EnvOutcome>{{Rat(1), 0, std::nullopt, Rat(0)}};
  return e;
}

EnvSpec EnvSpec::input_pattern_reward() {
  EnvSpec e;
  e.table.n_states = 1;
  e.table.default_row = std::vector<EnvOutcome>{
      {Rat(1, 2), 0, uint16_t{0xC000}, Rat(0)},  // x leading bits '11'
      {Rat(1, 2), 0, uint16_t{0x0000}, Rat(0)},
  };
  e.table.bonus = PatternBonus{"11", Rat(3)};
  e.table.assume_always_request = true;
  return e;
}

EnvSpec EnvSpec::gate(uint32_t max_wait) {
  // States 0..max_wait-1: gate closed (counting); state max_wait: open.
  // While closed, each cycle the gate opens with probability 1/2; after
  // max_wait cycles it opens for sure. Pressing an open gate pays +1.
  EnvSpec e;
  e.table.n_states = max_wait + 1;
  for (uint32_t s = 0; s < max_wait; ++s) {
    uint32_t next_closed = std::min(s + 1, max_wait - 1);
    std::vector<EnvOutcome> row = {{Rat(1, 2), max_wait, std::nullopt, Rat(0)},
                                   {Rat(1, 2), s + 1 == max_wait ? max_wait : next_closed + 0,
                                    std::nullopt, Rat(0)}};
    if (s + 1 >= max_wait) row[1].next_state = max_wait;  // forced open
    for (uint32_t a = 0; a < 16; ++a) e.table.rows[{s, a}] = row;
  }
  e.table.rows[{max_wait, 1}] = {{Rat(1), max_wait, std::nullopt, Rat(1)}};
  e.table.default_row = std::vector<EnvOutcome>{{Rat(1), 0, std::nullopt, Rat(0)}};
  return e;
}

void EnvRuntime::reset(const EnvSpec& spec) {
  *this = EnvRuntime{};
  if (spec.kind == EnvSpec::Kind::Table) state = spec.table.initial_state;
  else tour_node = spec.tour.start_node;
}

namespace {

std::vector<EnvOutcome> merged(std::vector<EnvOutcome> raw) {
  std::vector<EnvOutcome> out;
  for (auto& o : raw) {
    bool found = false;
    for (auto& m : out) {
      if (m.next_state == o.next_state && m.x_input == o.x_input) {
        // Exact merge: reward becomes the conditional mean.
        Rat total = m.prob + o.prob;
        m.reward = (m.reward * m.prob + o.reward * o.prob) / total;
        m.prob = total;
        found = true;
        break;
      }
    }
    if (!found) out.push_back(o);
  }
  return out;
}

}  // namespace

std::vector<EnvOutcome> EnvRuntime::dist(const EnvSpec& spec, uint32_t action,
                                         uint64_t completing_cycle, uint64_t horizon) const {
  if (spec.kind == EnvSpec::Kind::Table) {
    const TableEnv& t = spec.table;
    auto it = t.rows.find({state, action});
    if (it != t.rows.end()) return merged(it->second);
    if (t.default_row) {
      auto row = *t.default_row;
      for (auto& o : row) o.next_state = o.next_state < t.n_states ? o.next_state : state;
      return merged(row);
    }
    return {{Rat(1), state, std::nullopt, Rat(0)}};
  }
  // Tour: deterministic. Terminal reward on the cycle that completes T.
  EnvOutcome o;
  o.prob = 1;
  o.next_state = 0;
  uint32_t best = tour_best;
  // A move under way can finish a tour this cycle; apply() computes it, so
  // peek ahead for the terminal-reward case.
  if (completing_cycle >= horizon) {
    EnvRuntime peek = *this;
    peek.apply(spec, o, action);
    best = peek.tour_best;
    if (best > 0) o.reward = Rat(1) / Rat(best);
  }
  o.x_input = static_cast<uint16_t>(tour_best == 0 ? 0xffff : tour_best);
  return {o};
}

void EnvRuntime::apply(const EnvSpec& spec, const EnvOutcome& o, uint32_t action) {
  if (spec.kind == EnvSpec::Kind::Table) {
    state = o.next_state;
    return;
  }
  const TourEnv& t = spec.tour;
  uint32_t target = action & 0x7;
  if (t.n_nodes == 0 || target >= t.n_nodes || target == tour_node) return;
  uint32_t d = t.dist[tour_node][target];
  if (d == 0) return;  // no edge
  if (tour_visited == 0) tour_visited = 1u << t.start_node;
  tour_len += d;
  tour_node = target;
  tour_visited |= 1u << target;
  uint32_t all = (1u << t.n_nodes) - 1;
  if (target == t.start_node && tour_visited == all) {
    if (tour_best == 0 || tour_len < tour_best) tour_best = tour_len;
    tour_visited = 1u << t.start_node;
    tour_len = 0;
  }
}

uint64_t EnvRuntime::sig() const {
  uint64_t h = fnv1a(&state, sizeof(state));
  h = fnv1a(&tour_node, sizeof(tour_node), h);
  h = fnv1a(&tour_visited, sizeof(tour_visited), h);
  h = fnv1a(&tour_len, sizeof(tour_len), h);
  return fnv1a(&tour_best, sizeof(tour_best), h);
}

Rat pattern_bonus_reward(const EnvSpec& spec, const BitVec& x_bits) {
  if (spec.kind != EnvSpec::Kind::Table || !spec.table.bonus) return Rat(0);
  const PatternBonus& b = *spec.table.bonus;
  if (x_bits.size() < b.pattern.size()) return Rat(0);
  for (size_t i = 0; i < b.pattern.size(); ++i)
    if ((x_bits[i] != 0) != (b.pattern[i] == '1')) return Rat(0);
  return b.amount;
}

// --- axiom families ----------------------------------------------------------

namespace {
// Action encoding: low 4 bits of y.
std::pair<uint32_t, uint32_t> action_span(const RegionTable& regions) {
  const Region& y = regions.at(RegionId::Y);
  return {y.hi - 3, y.hi};
}
std::string action_bits(uint32_t a) { return bits_to_string(u64_to_bits(a, 4)); }
}  // namespace

std::vector<FormulaPtr> reward_axioms(const EnvSpec& spec, const RegionTable& regions,
                                      uint64_t horizon) {
  std::vector<FormulaPtr> out;
  auto tvar = [] { return Term::mk_var("t"); };
  if (spec.kind == EnvSpec::Kind::Table) {
    auto [alo, ahi] = action_span(regions);
    // One rule per action so every row of the table appears; rows with
    // outcome-dependent rewards are probability facts, not RewardEq facts.
    if (spec.table.n_states == 1 && !spec.table.bonus) {
      for (uint32_t a = 0; a < 16; ++a) {
        const std::vector<EnvOutcome>* row = nullptr;
        auto it = spec.table.rows.find({0, a});
        if (it != spec.table.rows.end()) row = &it->second;
        else if (spec.table.default_row) row = &*spec.table.default_row;
        if (!row || row->empty()) continue;
        bool fixed = true;
        for (const auto& o : *row)
          if (o.reward != row->front().reward) fixed = false;
        if (!fixed) continue;
        // forall t in [1, T-1]: y action at t == a -> R(t+1, t+1) = r
        FormulaPtr ante = Formula::mk_bits_eq(alo, ahi, tvar(), action_bits(a));
        TermPtr tnext = Term::mk_plus(tvar(), Term::mk_int(1));
        FormulaPtr cons = Formula::mk_reward_eq(tnext, tnext, row->front().reward);
        out.push_back(Formula::mk_forall("t", 1, static_cast<long long>(horizon) - 1,
                                         Formula::mk_implies(ante, cons)));
      }
    }
    if (spec.table.bonus) {
      const Region& x = regions.at(RegionId::X);
      const auto& b = *spec.table.bonus;
      FormulaPtr ante = Formula::mk_bits_eq(x.lo, x.lo + static_cast<uint32_t>(b.pattern.size()) - 1,
                                            tvar(), b.pattern);
      FormulaPtr cons = Formula::mk_reward_eq(tvar(), tvar(), b.amount);
      out.push_back(Formula::mk_forall("t", 2, static_cast<long long>(horizon),
                                       Formula::mk_implies(ante, cons)));
    }
  } else {
    // Tour: reward at T is 1/L when the best-length report in x reads L.
    const Region& x = regions.at(RegionId::X);
    // Achievable closed-tour lengths, by exhaustive permutation (n <= 8).
    const TourEnv& t = spec.tour;
    std::vector<uint32_t> lens;
    std::vector<uint32_t> order;
    for (uint32_t i = 0; i < t.n_nodes; ++i)
      if (i != t.start_node) order.push_back(i);
    std::sort(order.begin(), order.end());
    do {
      uint32_t len = 0;
      uint32_t cur = t.start_node;
      bool ok = true;
      for (uint32_t nxt : order) {
        if (t.dist[cur][nxt] == 0) { ok = false; break; }
        len += t.dist[cur][nxt];
        cur = nxt;
      }
      if (ok && t.dist[cur][t.start_node] != 0) {
        len += t.dist[cur][t.start_node];
        if (std::find(lens.begin(), lens.end(), len) == lens.end()) lens.push_back(len);
      }
    } while (std::next_permutation(order.begin(), order.end()));
    std::sort(lens.begin(), lens.end());
    for (uint32_t L : lens) {
      FormulaPtr ante = Formula::mk_bits_eq(x.lo, x.lo + 15, Term::mk_int(static_cast<long long>(horizon)),
                                            bits_to_string(u64_to_bits(L, 16)));
      FormulaPtr cons = Formula::mk_reward_eq(Term::mk_int(static_cast<long long>(horizon)),
                                              Term::mk_int(static_cast<long long>(horizon)),
                                              Rat(1) / Rat(L));
      out.push_back(Formula::mk_implies(ante, cons));
    }
  }
  return out;
}

std::vector<FormulaPtr> environment_axioms(const EnvSpec& spec, const RegionTable& regions,
                                           uint64_t horizon) {
  std::vector<FormulaPtr> out;
  if (spec.kind != EnvSpec::Kind::Table) return out;
  const TableEnv& t = spec.table;
  auto [alo, ahi] = action_span(regions);
  const Region& x = regions.at(RegionId::X);
  auto tvar = [] { return Term::mk_var("t"); };
  auto emit_row = [&](uint32_t action, const std::vector<EnvOutcome>& row) {
    for (const auto& o : row) {
      if (!o.x_input) continue;
      // forall t: action(t)=a -> P(x(t+1) = payload) = p. Sound only for
      // always-requesting configs (otherwise x cannot change).
      std::string payload = bits_to_string(u64_to_bits(*o.x_input, 16));
      uint32_t plo = x.lo, phi = x.lo + 15;
      if (phi > x.hi) continue;
      FormulaPtr ante = Formula::mk_bits_eq(alo, ahi, tvar(), action_bits(action));
      FormulaPtr cons = Formula::mk_prob_cmp(plo, phi, Term::mk_plus(tvar(), Term::mk_int(1)),
                                              payload, Cmp::Eq, o.prob);
      out.push_back(Formula::mk_forall("t", 1, static_cast<long long>(horizon) - 1,
                                       Formula::mk_implies(ante, cons)));
    }
  };
  if (t.n_states == 1 && t.assume_always_request) {
    for (uint32_t a = 0; a < 16; ++a) {
      auto it = t.rows.find({0, a});
      if (it != t.rows.end()) emit_row(a, it->second);
      else if (t.default_row) emit_row(a, *t.default_row);
    }
  }
  return out;
}

}  // namespace selfproof
