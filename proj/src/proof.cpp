// Copyright 2026 the selfproof authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0

#include "selfproof/proof.hpp"

#include <algorithm>
#include <sstream>

namespace selfproof {

// ---------------------------------------------------------------------------
// Model evaluation
// ---------------------------------------------------------------------------

std::optional<Rat> eval_term(const TermPtr& t, ModelCtx& model) {
  switch (t->kind) {
    case Term::Kind::Var: return std::nullopt;
    case Term::Kind::Lit: return t->lit;
    case Term::Kind::Plus: {
      auto a = eval_term(t->a, model);
      auto b = eval_term(t->b, model);
      if (!a || !b) return std::nullopt;
      return *a + *b;
    }
    case Term::Kind::Str2Num: {
      auto tv = eval_term(t->t, model);
      if (!tv || denominator(*tv) != 1) return std::nullopt;
      if (*tv < 1) return std::nullopt;
      if (t->hi - t->lo + 1 > 64) return std::nullopt;
      auto bits = model.bits_at(static_cast<uint64_t>(numerator(*tv)), t->lo, t->hi);
      if (!bits) return std::nullopt;
      return Rat(bits_to_u64(*bits));
    }
    case Term::Kind::Util: {
      auto tv = eval_term(t->t, model);
      if (!tv || denominator(*tv) != 1 || *tv < 1) return std::nullopt;
      auto uu = model.branch_utilities(static_cast<uint64_t>(numerator(*tv)));
      if (!uu) return std::nullopt;
      return t->branch ? uu->first : uu->second;
    }
  }
  return std::nullopt;
}

namespace {
std::optional<uint64_t> eval_time(const TermPtr& t, ModelCtx& model) {
  auto v = eval_term(t, model);
  if (!v || denominator(*v) != 1 || *v < 1) return std::nullopt;
  return static_cast<uint64_t>(numerator(*v));
}
}  // namespace

std::optional<bool> eval_formula(const FormulaPtr& f, ModelCtx& model, uint64_t clip) {
  using K = Formula::Kind;
  switch (f->kind) {
    case K::BitsEq: {
      auto t = eval_time(f->t1, model);
      if (!t) return std::nullopt;
      auto bits = model.bits_at(*t, f->lo, f->hi);
      if (!bits) return std::nullopt;
      return bits_to_string(*bits) == f->bits;
    }
    case K::NumCmp: {
      auto a = eval_term(f->a, model);
      auto b = eval_term(f->b, model);
      if (!a || !b) return std::nullopt;
      return cmp_holds(*a, f->cmp, *b);
    }
    case K::RewardEq: {
      auto t1 = eval_time(f->t1, model);
      auto t2 = eval_time(f->t2, model);
      if (!t1 || !t2) return std::nullopt;
      auto r = model.reward_between(*t1, *t2);
      if (!r) return std::nullopt;
      return *r == f->value;
    }
    case K::ProbCmp: {
      auto t = eval_time(f->t1, model);
      if (!t) return std::nullopt;
      auto p = model.prob_of(*t, f->lo, f->hi, f->bits);
      if (!p) return std::nullopt;
      return cmp_holds(*p, f->cmp, f->value);
    }
    case K::UtilCmp: {
      auto t1 = eval_time(f->t1, model);
      if (!t1) return std::nullopt;
      auto uu = model.branch_utilities(*t1);
      if (!uu) return std::nullopt;
      return cmp_holds(uu->first, f->cmp, uu->second);
    }
    case K::Not: {
      auto v = eval_formula(f->f, model, clip);
      if (!v) return std::nullopt;
      return !*v;
    }
    case K::And: {
      auto a = eval_formula(f->f, model, clip);
      if (a && !*a) return false;
      auto b = eval_formula(f->g, model, clip);
      if (b && !*b) return false;
      if (!a || !b) return std::nullopt;
      return true;
    }
    case K::Or: {
      auto a = eval_formula(f->f, model, clip);
      if (a && *a) return true;
      auto b = eval_formula(f->g, model, clip);
      if (b && *b) return true;
      if (!a || !b) return std::nullopt;
      return false;
    }
    case K::Implies: {
      auto a = eval_formula(f->f, model, clip);
      if (a && !*a) return true;  // vacuous
      auto b = eval_formula(f->g, model, clip);
      if (b && *b) return true;
      if (!a || !b) return std::nullopt;
      return !*a || *b;
    }
    case K::Forall: {
      long long hi = f->hi_bound;
      if (clip > 0) hi = std::min(hi, static_cast<long long>(clip));
      for (long long v = f->lo_bound; v <= hi; ++v) {
        auto r = eval_formula(formula_subst(f->f, f->var, v), model, clip);
        if (!r) return std::nullopt;
        if (!*r) return false;
      }
      return true;
    }
    case K::Exists: {
      long long hi = f->hi_bound;
      if (clip > 0) hi = std::min(hi, static_cast<long long>(clip));
      for (long long v = f->lo_bound; v <= hi; ++v) {
        auto r = eval_formula(formula_subst(f->f, f->var, v), model, clip);
        if (r && *r) return true;
      }
      return false;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Axiom scheme
// ---------------------------------------------------------------------------

namespace {
constexpr uint64_t kMaxObservationSpan = 64;  // initial-state instance width cap

bool image_jump_free(const std::vector<uint16_t>& words) {
  for (uint16_t w : words) {
    Opcode op = decode_opcode(w);
    if (op == Opcode::Jmp || op == Opcode::Jnz || op == Opcode::Djnz) return false;
  }
  return true;
}
}  // namespace

AxiomScheme::AxiomScheme(SchemeConfig cfg) : cfg_(std::move(cfg)) {
  const RegionTable& rt = cfg_.regions;
  const Region& time = rt.at(RegionId::Time);
  const Region& ip = rt.at(RegionId::Ip);
  const Region& sb = rt.at(RegionId::SwitchBit);
  const Region& y = rt.at(RegionId::Y);
  const Region& acc = rt.at(RegionId::Acc);
  const Region& x = rt.at(RegionId::X);
  long long T = static_cast<long long>(cfg_.hw.lifetime);
  auto tvar = [] { return Term::mk_var("t"); };

  // hardware: how hardware-owned components of s evolve.
  hardware_.push_back(Formula::mk_forall(
      "t", 1, T - 1,
      Formula::mk_num_cmp(
          Term::mk_str2num(time.lo, time.hi, Term::mk_plus(tvar(), Term::mk_int(1))), Cmp::Eq,
          Term::mk_plus(Term::mk_str2num(time.lo, time.hi, tvar()), Term::mk_int(1)))));
  hardware_.push_back(Formula::mk_bits_eq(time.lo, time.hi, Term::mk_int(1),
                                          bits_to_string(u64_to_bits(1, time.width()))));
  hardware_.push_back(Formula::mk_bits_eq(sb.lo, sb.hi, Term::mk_int(1), "0"));
  {
    BitVec y1(cfg_.initial_bits.begin() + y.lo - 1, cfg_.initial_bits.begin() + y.hi);
    hardware_.push_back(Formula::mk_bits_eq(y.lo, y.hi, Term::mk_int(1), bits_to_string(y1)));
  }
  if (cfg_.e_image_jump_free && cfg_.hw.e_words >= 2) {
    const Region& p = rt.at(RegionId::P);
    uint32_t e_lo = p.lo;
    uint32_t e_hi = p.lo + cfg_.hw.e_words * cfg_.hw.word_size - 1;
    FormulaPtr guard_img =
        Formula::mk_bits_eq(e_lo, e_hi, tvar(), bits_to_string(cfg_.e_image_bits));
    FormulaPtr guard_ip =
        Formula::mk_num_cmp(Term::mk_str2num(ip.lo, ip.hi, tvar()), Cmp::Eq, Term::mk_var("n"));
    FormulaPtr conseq = Formula::mk_num_cmp(
        Term::mk_str2num(ip.lo, ip.hi, Term::mk_plus(tvar(), Term::mk_int(1))), Cmp::Eq,
        Term::mk_plus(Term::mk_var("n"), Term::mk_int(1)));
    FormulaPtr body = Formula::mk_implies(Formula::mk_and(guard_img, guard_ip), conseq);
    hardware_.push_back(Formula::mk_forall(
        "t", 1, T - 1,
        Formula::mk_forall("n", 0, static_cast<long long>(cfg_.hw.e_words) - 2, body)));
  }

  reward_ = reward_axioms(cfg_.env, rt, cfg_.hw.lifetime);
  environment_ = environment_axioms(cfg_.env, rt, cfg_.hw.lifetime);

  // uncertainty / string manipulation glue.
  uncertainty_.push_back(Formula::mk_forall(
      "t", 1, T,
      Formula::mk_num_cmp(Term::mk_str2num(time.lo, time.hi, tvar()), Cmp::Eq, tvar())));
  uncertainty_.push_back(Formula::mk_forall(
      "t", 1, T,
      Formula::mk_num_cmp(Term::mk_str2num(acc.lo, acc.hi, tvar()), Cmp::Le,
                          Term::mk_int((1ll << acc.width()) - 1))));
  uncertainty_.push_back(Formula::mk_forall(
      "t", 2, T, Formula::mk_prob_cmp(x.lo, x.lo, tvar(), "0", Cmp::Le, Rat(1))));

  // utility: definitional bridges from evaluated branch comparisons to the
  // target-theorem atom, one per mode.
  for (int mode = 0; mode < 2; ++mode) {
    Cmp c = mode ? Cmp::Ge : Cmp::Gt;
    FormulaPtr ante = Formula::mk_num_cmp(Term::mk_util(Term::mk_var("t1"), 1), c,
                                          Term::mk_util(Term::mk_var("t1"), 0));
    FormulaPtr cons = Formula::mk_util_cmp(Term::mk_var("t1"), c);
    utility_.push_back(Formula::mk_forall("t1", 1, T, Formula::mk_implies(ante, cons)));
  }
}

size_t AxiomScheme::family_size(AxiomFamily fam) const {
  switch (fam) {
    case AxiomFamily::Hardware: return hardware_.size();
    case AxiomFamily::Reward: return reward_.size();
    case AxiomFamily::Environment: return environment_.size();
    case AxiomFamily::Uncertainty: return uncertainty_.size();
    case AxiomFamily::InitialState: return 0;  // unbounded
    case AxiomFamily::Utility: return utility_.size();
  }
  return 0;
}

std::optional<FormulaPtr> AxiomScheme::initial_state_instance(uint64_t inst) const {
  uint64_t lo = inst / kMaxObservationSpan + 1;
  uint64_t len = inst % kMaxObservationSpan + 1;
  uint64_t hi = lo + len - 1;
  if (hi > cfg_.initial_bits.size()) return std::nullopt;
  BitVec z(cfg_.initial_bits.begin() + lo - 1, cfg_.initial_bits.begin() + hi);
  return Formula::mk_bits_eq(static_cast<uint32_t>(lo), static_cast<uint32_t>(hi),
                             Term::mk_int(1), bits_to_string(z));
}

std::optional<FormulaPtr> AxiomScheme::family_instance(AxiomFamily fam, uint64_t inst) const {
  auto from = [&](const std::vector<FormulaPtr>& v) -> std::optional<FormulaPtr> {
    if (inst >= v.size()) return std::nullopt;
    return v[inst];
  };
  switch (fam) {
    case AxiomFamily::Hardware: return from(hardware_);
    case AxiomFamily::Reward: return from(reward_);
    case AxiomFamily::Environment: return from(environment_);
    case AxiomFamily::Uncertainty: return from(uncertainty_);
    case AxiomFamily::InitialState: return initial_state_instance(inst);
    case AxiomFamily::Utility: return from(utility_);
  }
  return std::nullopt;
}

std::optional<FormulaPtr> AxiomScheme::axiom(uint64_t n) const {
  return family_instance(static_cast<AxiomFamily>(n % 6), n / 6);
}

std::optional<uint64_t> AxiomScheme::recognize(const FormulaPtr& f) const {
  std::string key = formula_to_sexpr(f);
  auto scan = [&](const std::vector<FormulaPtr>& v, uint64_t fam) -> std::optional<uint64_t> {
    for (size_t i = 0; i < v.size(); ++i)
      if (formula_to_sexpr(v[i]) == key) return 6 * i + fam;
    return std::nullopt;
  };
  if (auto n = scan(hardware_, 0)) return n;
  if (auto n = scan(reward_, 1)) return n;
  if (auto n = scan(environment_, 2)) return n;
  if (auto n = scan(uncertainty_, 3)) return n;
  if (auto n = scan(utility_, 5)) return n;
  // initial-state: invert the pairing.
  if (f->kind == Formula::Kind::BitsEq && f->t1->kind == Term::Kind::Lit && f->t1->lit == 1) {
    uint64_t lo = f->lo, hi = f->hi;
    uint64_t len = hi - lo + 1;
    if (len >= 1 && len <= kMaxObservationSpan && hi <= cfg_.initial_bits.size()) {
      uint64_t inst = (lo - 1) * kMaxObservationSpan + (len - 1);
      auto g = initial_state_instance(inst);
      if (g && formula_to_sexpr(*g) == key) return 6 * inst + 4;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Proof object
// ---------------------------------------------------------------------------

std::string Provenance::tag() const {
  switch (kind) {
    case Kind::Axiom: return "ax:" + std::to_string(axiom_n);
    case Kind::Rule:
      return "rule:" + std::to_string(rule_k) + ":" + std::to_string(cite_m) + ":" +
             std::to_string(cite_n);
    case Kind::Observed: return "obs:" + std::to_string(observed_t1);
  }
  return "?";
}

size_t Proof::live_count() const {
  size_t n = 0;
  for (const auto& e : entries_)
    if (!e.tombstoned) ++n;
  return n;
}

const Theorem* Proof::last_live() const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
    if (!it->tombstoned) return &*it;
  return nullptr;
}

const Theorem& Proof::at(uint64_t index) const {
  if (index < 1 || index > entries_.size()) throw RuleInapplicable("no such theorem");
  const Theorem& t = entries_[index - 1];
  if (t.tombstoned) throw DeadReference("theorem was deleted");
  return t;
}

bool Proof::live(uint64_t index) const {
  return index >= 1 && index <= entries_.size() && !entries_[index - 1].tombstoned;
}

std::string Proof::serialize() const {
  std::string out;
  for (const auto& e : entries_) {
    out += std::to_string(e.index);
    if (e.tombstoned) {
      out += " tomb\n";
    } else {
      out += " " + e.prov.tag() + " " + formula_to_sexpr(e.formula) + "\n";
    }
  }
  return out;
}

std::string Proof::export_lines() const {
  std::string out;
  for (const auto& e : entries_) {
    if (e.tombstoned) {
      out += "; " + std::to_string(e.index) + " deleted\n";
      continue;
    }
    out += formula_to_sexpr(e.formula) + " ; " + std::to_string(e.index) + " " + e.prov.tag();
    if (e.prov.unfold_values)
      out += " u1=" + rat_to_string(e.prov.unfold_values->first) +
             " u0=" + rat_to_string(e.prov.unfold_values->second);
    out += "\n";
  }
  return out;
}

void Proof::mirror(Machine& m, Actor actor) {
  const Region& r = m.regions().at(RegionId::Proof);
  std::string text = serialize();
  if (text.size() * 8 > r.width()) throw ProofOverflow("proof region full");
  BitVec content(r.width(), 0);
  for (size_t i = 0; i < text.size(); ++i)
    for (int b = 0; b < 8; ++b)
      content[i * 8 + b] = (static_cast<uint8_t>(text[i]) >> (7 - b)) & 1;
  // Journal only the span that changed.
  BitVec current = m.read_region(RegionId::Proof);
  size_t lo = 0, hi = content.size();
  while (lo < hi && content[lo] == current[lo]) ++lo;
  while (hi > lo && content[hi - 1] == current[hi - 1]) --hi;
  if (lo == hi) return;
  BitVec span(content.begin() + lo, content.begin() + hi);
  m.write_region(RegionId::Proof, r.lo + static_cast<uint32_t>(lo),
                 r.lo + static_cast<uint32_t>(hi) - 1, span, actor);
}

const Theorem& Proof::append(FormulaPtr f, Provenance prov, Machine& m, Actor actor) {
  Theorem t;
  t.index = entries_.size() + 1;
  t.formula = std::move(f);
  t.prov = std::move(prov);
  entries_.push_back(std::move(t));
  try {
    mirror(m, actor);
  } catch (...) {
    entries_.pop_back();
    throw;
  }
  return entries_.back();
}

void Proof::tombstone(uint64_t index, Machine& m, Actor actor) {
  if (index < 1 || index > entries_.size()) throw OutOfRange("delete: no such theorem");
  Theorem& t = entries_[index - 1];
  if (t.tombstoned) throw DeadReference("delete: already deleted");
  t.tombstoned = true;
  mirror(m, actor);
}

void Proof::pop_last(Machine& m, Actor actor) {
  if (entries_.empty()) throw OutOfRange("pop on empty proof");
  entries_.pop_back();
  mirror(m, actor);
}

void Proof::reset(Machine& m, Actor actor) {
  entries_.clear();
  mirror(m, actor);
}

std::optional<Proof> Proof::import_lines(const std::string& text) {
  Proof p;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    if (line[0] == ';') {  // tombstone marker
      Theorem t;
      t.index = p.entries_.size() + 1;
      t.tombstoned = true;
      p.entries_.push_back(std::move(t));
      continue;
    }
    auto sep = line.find(" ; ");
    if (sep == std::string::npos) return std::nullopt;
    auto f = formula_from_sexpr(line.substr(0, sep));
    if (!f) return std::nullopt;
    std::istringstream meta(line.substr(sep + 3));
    uint64_t idx = 0;
    std::string tag;
    meta >> idx >> tag;
    Theorem t;
    t.index = p.entries_.size() + 1;
    t.formula = *f;
    if (tag.rfind("ax:", 0) == 0) {
      t.prov.kind = Provenance::Kind::Axiom;
      t.prov.axiom_n = std::stoull(tag.substr(3));
    } else if (tag.rfind("rule:", 0) == 0) {
      t.prov.kind = Provenance::Kind::Rule;
      std::string rest = tag.substr(5);
      auto c1 = rest.find(':');
      auto c2 = rest.find(':', c1 + 1);
      if (c1 == std::string::npos || c2 == std::string::npos) return std::nullopt;
      t.prov.rule_k = static_cast<uint32_t>(std::stoul(rest.substr(0, c1)));
      t.prov.cite_m = std::stoull(rest.substr(c1 + 1, c2 - c1 - 1));
      t.prov.cite_n = std::stoull(rest.substr(c2 + 1));
      std::string extra;
      Rat u1, u0;
      bool got1 = false, got0 = false;
      while (meta >> extra) {
        if (extra.rfind("u1=", 0) == 0) {
          auto v = rat_parse(extra.substr(3));
          if (v) { u1 = *v; got1 = true; }
        } else if (extra.rfind("u0=", 0) == 0) {
          auto v = rat_parse(extra.substr(3));
          if (v) { u0 = *v; got0 = true; }
        }
      }
      if (got1 && got0) t.prov.unfold_values = std::make_pair(u1, u0);
    } else if (tag.rfind("obs:", 0) == 0) {
      t.prov.kind = Provenance::Kind::Observed;
      t.prov.observed_t1 = std::stoull(tag.substr(4));
    } else {
      return std::nullopt;
    }
    p.entries_.push_back(std::move(t));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Inference
// ---------------------------------------------------------------------------

FormulaPtr make_target(uint64_t t1, TargetMode mode) {
  return Formula::mk_util_cmp(Term::mk_int(static_cast<long long>(t1)),
                              mode == TargetMode::Strict ? Cmp::Gt : Cmp::Ge);
}

std::optional<uint64_t> is_target_theorem(const FormulaPtr& f, TargetMode mode) {
  if (!f || f->kind != Formula::Kind::UtilCmp) return std::nullopt;
  Cmp want = mode == TargetMode::Strict ? Cmp::Gt : Cmp::Ge;
  if (f->cmp != want) return std::nullopt;
  if (f->t1->kind != Term::Kind::Lit) return std::nullopt;
  if (denominator(f->t1->lit) != 1 || f->t1->lit < 1) return std::nullopt;
  return static_cast<uint64_t>(numerator(f->t1->lit));
}

FormulaPtr rule_conclusion(uint32_t rule_k, const FormulaPtr& fm, const FormulaPtr& fn,
                           uint64_t n_value) {
  using K = Formula::Kind;
  switch (rule_k) {
    case kRuleMp: {
      if (!fm || !fn) return nullptr;
      if (fm->kind == K::Implies) {
        if (formula_equal(fm->f, fn)) return fm->g;
        return nullptr;
      }
      if (fm->kind == K::Forall && fm->f && fm->f->kind == K::Implies) {
        std::string want = formula_to_sexpr(fn);
        for (long long v = fm->lo_bound; v <= fm->hi_bound; ++v) {
          if (formula_to_sexpr(formula_subst(fm->f->f, fm->var, v)) == want)
            return formula_subst(fm->f->g, fm->var, v);
        }
        return nullptr;
      }
      return nullptr;
    }
    case kRuleForallInst: {
      if (!fm || fm->kind != K::Forall) return nullptr;
      long long v = static_cast<long long>(n_value);
      if (v < fm->lo_bound || v > fm->hi_bound) return nullptr;
      return formula_subst(fm->f, fm->var, v);
    }
    case kRuleAndIntro:
      if (!fm || !fn) return nullptr;
      return Formula::mk_and(fm, fn);
    case kRuleAndElim: {
      if (!fm || fm->kind != K::And) return nullptr;
      if (n_value == 0) return fm->f;
      if (n_value == 1) return fm->g;
      return nullptr;
    }
    default: return nullptr;
  }
}

const Theorem& infer(uint32_t rule_k, uint64_t m, uint64_t n, Proof& proof, Machine& machine,
                     InferCtx& ctx, Actor actor) {
  if (rule_k >= kRuleCount) throw RuleInapplicable("no such rule");

  if (rule_k == kRuleUnfold) {
    if (m > 1) throw RuleInapplicable("unfold: bad mode");
    if (!ctx.unfold) throw RuleInapplicable("unfold: no system context");
    TargetMode mode = m == 0 ? TargetMode::Strict : TargetMode::Relaxed;
    uint64_t t1 = ctx.now + ctx.unfold_headroom;
    if (t1 + 8 >= ctx.horizon) throw RuleInapplicable("unfold: no room before horizon");
    FormulaPtr target = make_target(t1, mode);
    Provenance prov;
    prov.kind = Provenance::Kind::Rule;
    prov.rule_k = kRuleUnfold;
    prov.cite_m = m;
    prov.cite_n = n;
    proof.append(target, prov, machine, actor);
    Rat u1, u0;
    bool ok = false;
    try {
      ok = ctx.unfold(t1, mode == TargetMode::Relaxed, u1, u0);
    } catch (...) {
      proof.pop_last(machine, actor);
      throw;
    }
    Cmp c = mode == TargetMode::Strict ? Cmp::Gt : Cmp::Ge;
    if (!ok || !cmp_holds(u1, c, u0)) {
      proof.pop_last(machine, actor);
      throw RuleInapplicable("unfold: comparison does not hold");
    }
    // Record the evaluated numerals on the appended entry. The aux values are
    // trace/verification metadata and are not part of the region mirror.
    auto& entries = const_cast<std::vector<Theorem>&>(proof.entries());
    entries.back().prov.unfold_values = std::make_pair(u1, u0);
    return proof.entries().back();
  }

  const Theorem& tm = proof.at(m);  // throws on dead/missing
  FormulaPtr fm = tm.formula;
  FormulaPtr fn;
  uint64_t n_value = n;
  if (rule_k == kRuleMp || rule_k == kRuleAndIntro) {
    fn = proof.at(n).formula;
  }

  FormulaPtr conclusion;
  if (rule_k == kRuleClosedEval) {
    if (!fm || fm->kind != Formula::Kind::Implies) throw RuleInapplicable("closed-eval: premise not an implication");
    FormulaPtr ante = fm->f;
    bool atom = ante->kind == Formula::Kind::BitsEq || ante->kind == Formula::Kind::NumCmp ||
                ante->kind == Formula::Kind::RewardEq || ante->kind == Formula::Kind::ProbCmp;
    if (!atom || !formula_closed(ante) || formula_mentions_util(ante))
      throw RuleInapplicable("closed-eval: antecedent not a closed atom");
    if (!ctx.model) throw RuleInapplicable("closed-eval: no model");
    auto v = eval_formula(ante, *ctx.model);
    if (!v || !*v) throw RuleInapplicable("closed-eval: antecedent not established");
    conclusion = ante;
  } else {
    conclusion = rule_conclusion(rule_k, fm, fn, n_value);
  }
  if (!conclusion) throw RuleInapplicable("rule does not apply");

  Provenance prov;
  prov.kind = Provenance::Kind::Rule;
  prov.rule_k = rule_k;
  prov.cite_m = m;
  prov.cite_n = n;
  return proof.append(conclusion, prov, machine, actor);
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

VerifyResult verify_proof(const Proof& proof, const AxiomScheme& scheme, const VerifyOptions& opt) {
  VerifyResult res;
  auto fail = [&](uint64_t idx, const std::string& why) {
    res.ok = false;
    if (res.first_error.empty())
      res.first_error = "entry " + std::to_string(idx) + ": " + why;
  };
  const auto& entries = proof.entries();
  for (size_t i = 0; i < entries.size(); ++i) {
    const Theorem& t = entries[i];
    if (t.tombstoned) continue;
    ++res.checked;
    if (!t.formula) {
      fail(t.index, "missing formula");
      continue;
    }
    switch (t.prov.kind) {
      case Provenance::Kind::Axiom: {
        auto ax = scheme.axiom(t.prov.axiom_n);
        if (!ax || !formula_equal(*ax, t.formula)) fail(t.index, "not the claimed axiom");
        break;
      }
      case Provenance::Kind::Rule: {
        uint32_t k = t.prov.rule_k;
        if (k == kRuleUnfold) {
          TargetMode mode = t.prov.cite_m == 0 ? TargetMode::Strict : TargetMode::Relaxed;
          auto t1 = is_target_theorem(t.formula, mode);
          if (!t1) { fail(t.index, "unfold conclusion is not a target theorem"); break; }
          if (!t.prov.unfold_values) { fail(t.index, "unfold lacks evaluation record"); break; }
          Cmp c = mode == TargetMode::Strict ? Cmp::Gt : Cmp::Ge;
          if (!cmp_holds(t.prov.unfold_values->first, c, t.prov.unfold_values->second))
            fail(t.index, "recorded unfold values do not satisfy the comparison");
          break;
        }
        auto premise = [&](uint64_t idx) -> FormulaPtr {
          if (idx < 1 || idx > entries.size() || idx >= t.index) return nullptr;
          const Theorem& p = entries[idx - 1];
          return p.formula;
        };
        FormulaPtr fm = premise(t.prov.cite_m);
        if (!fm) { fail(t.index, "bad premise citation"); break; }
        if (k == kRuleClosedEval) {
          if (fm->kind != Formula::Kind::Implies || !formula_equal(fm->f, t.formula)) {
            fail(t.index, "closed-eval conclusion mismatch");
            break;
          }
          if (opt.model) {
            auto v = eval_formula(t.formula, *opt.model, opt.clip_horizon);
            if (!v || !*v) fail(t.index, "closed-eval atom false in model");
          }
          break;
        }
        FormulaPtr fn;
        if (k == kRuleMp || k == kRuleAndIntro) {
          fn = premise(t.prov.cite_n);
          if (!fn) { fail(t.index, "bad premise citation"); break; }
        }
        FormulaPtr conc = rule_conclusion(k, fm, fn, t.prov.cite_n);
        if (!conc || !formula_equal(conc, t.formula)) fail(t.index, "rule recomputation mismatch");
        break;
      }
      case Provenance::Kind::Observed: {
        if (t.formula->kind != Formula::Kind::BitsEq) { fail(t.index, "observation is not BitsEq"); break; }
        if (t.formula->t1->kind != Term::Kind::Lit ||
            t.formula->t1->lit != Rat(static_cast<long long>(t.prov.observed_t1))) {
          fail(t.index, "observation time mismatch");
          break;
        }
        if (opt.model) {
          auto bits = opt.model->bits_at(t.prov.observed_t1, t.formula->lo, t.formula->hi);
          if (bits && bits_to_string(*bits) != t.formula->bits)
            fail(t.index, "observation contradicts trace");
        }
        break;
      }
    }
  }
  return res;
}

}  // namespace selfproof
