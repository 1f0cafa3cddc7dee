// Copyright 2026 the selfproof authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0

#include "selfproof/technique_vm.hpp"

#include "selfproof/switchexec.hpp"

namespace selfproof {

uint64_t unfold_surcharge(uint64_t now, uint64_t horizon) {
  return horizon > now ? (horizon - now) / 4 : 0;
}

namespace {
uint64_t instr_token_span(const Instr& ins) {
  uint64_t n = 1;
  for (uint64_t a : ins.args) n += numeral_length(a);
  return n;
}
}  // namespace

TechniqueRun::TechniqueRun(Technique w, uint64_t budget) : w_(std::move(w)), budget_(budget) {
  auto decoded = decode_technique(w_);
  if (decoded) instrs_ = std::move(*decoded);
  else out_ = {RunStatus::Error, 0, 0, 0, "malformed token stream"};
}

void TechniqueRun::begin(SystemCtx& sys) {
  mark_ = sys.life_mark();
  begun_ = true;
  // proof and sp reset to the empty string for each new technique test.
  sys.proof().reset(sys.machine(), Actor::Technique);
  const Region& sp = sys.machine().regions().at(RegionId::Sp);
  sys.machine().write_region(RegionId::Sp, sp.lo, sp.hi, BitVec(sp.width(), 0), Actor::Technique);
}

RunStatus TechniqueRun::fail(const std::string& why) {
  out_.status = RunStatus::Error;
  out_.error = why;
  return out_.status;
}

bool TechniqueRun::charge(uint64_t cost) {
  if (out_.steps_used + cost > budget_) {
    out_.status = RunStatus::BudgetExhausted;
    return false;
  }
  out_.steps_used += cost;
  return true;
}

RunStatus TechniqueRun::step(SystemCtx& sys) {
  if (out_.status != RunStatus::Running) return out_.status;
  if (sys.life_over()) return fail("lifetime exhausted");
  if (pc_ >= instrs_.size()) return fail("ran past program end");

  Machine& m = sys.machine();
  Proof& proof = sys.proof();
  const Instr& ins = instrs_[pc_];
  uint64_t span = instr_token_span(ins);
  uint64_t time_words =
      (m.regions().at(RegionId::Time).width() + m.spec().word_size - 1) / m.spec().word_size;

  try {
    switch (ins.tok) {
      case kTokHalt:
        if (!charge(1)) break;
        out_.status = RunStatus::Halted;
        break;

      case kTokGetAxiom: {
        auto ax = sys.scheme().axiom(ins.args[0]);
        if (!ax) {
          if (charge(span)) fail("NotAnAxiom");
          break;
        }
        if (!charge(span + formula_size(*ax))) break;
        Provenance prov;
        prov.kind = Provenance::Kind::Axiom;
        prov.axiom_n = ins.args[0];
        const Theorem& t = proof.append(*ax, prov, m, Actor::Technique);
        ++out_.proof_appended;
        sys.note(SysEvent::TheoremAppended, t.index);
        ++pc_;
        break;
      }

      case kTokApplyRule: {
        uint64_t k = ins.args[0];
        if (k >= kRuleCount) {
          if (charge(span)) fail("RuleInapplicable: no such rule");
          break;
        }
        InferCtx ctx;
        ctx.model = &sys.live_model();
        ctx.now = m.cycle();
        ctx.horizon = m.lifetime();
        ctx.unfold_headroom = m.setting(kSettingUnfoldHeadroom);
        uint64_t mm = ins.args[1], nn = ins.args[2];
        if (k == kRuleUnfold) {
          uint64_t t1 = ctx.now + ctx.unfold_headroom;
          FormulaPtr target = make_target(t1, mm == 0 ? TargetMode::Strict : TargetMode::Relaxed);
          uint64_t cost = span + formula_size(target) + unfold_surcharge(ctx.now, ctx.horizon);
          if (!charge(cost)) break;
          ++pc_;  // forks taken during evaluation must resume after this instruction
          ctx.unfold = [&sys](uint64_t tt1, bool relaxed, Rat& u1, Rat& u0) {
            return sys.unfold_branches(tt1, relaxed, u1, u0);
          };
          const Theorem& t = infer(kRuleUnfold, mm, nn, proof, m, ctx, Actor::Technique);
          ++out_.proof_appended;
          sys.note(SysEvent::TheoremAppended, t.index);
          break;
        }
        // Token-level indices count back from the most recent entry.
        size_t total = proof.entries().size();
        auto translate = [&](uint64_t d) -> uint64_t {
          return d < total ? total - d : 0;  // 0 = invalid, caught by infer
        };
        uint64_t am = translate(mm);
        uint64_t an = nn;
        if (k == kRuleMp || k == kRuleAndIntro) an = translate(nn);
        // Preview the conclusion for the cost charge.
        FormulaPtr conclusion;
        if (k == kRuleClosedEval) {
          const Theorem& tm = proof.at(am);
          if (tm.formula->kind != Formula::Kind::Implies) {
            if (charge(span)) fail("RuleInapplicable: closed-eval premise");
            break;
          }
          conclusion = tm.formula->f;
        } else {
          FormulaPtr fm = proof.at(am).formula;
          FormulaPtr fn;
          if (k == kRuleMp || k == kRuleAndIntro) fn = proof.at(an).formula;
          conclusion = rule_conclusion(static_cast<uint32_t>(k), fm, fn, an);
          if (!conclusion) {
            if (charge(span)) fail("RuleInapplicable");
            break;
          }
        }
        if (!charge(span + formula_size(conclusion))) break;
        const Theorem& t =
            infer(static_cast<uint32_t>(k), am, an, proof, m, ctx, Actor::Technique);
        ++out_.proof_appended;
        sys.note(SysEvent::TheoremAppended, t.index);
        ++pc_;
        break;
      }

      case kTokDelete: {
        if (!charge(span)) break;
        size_t total = proof.entries().size();
        uint64_t d = ins.args[0];
        uint64_t idx = d < total ? total - d : 0;
        proof.tombstone(idx, m, Actor::Technique);
        ++out_.proof_tombstoned;
        sys.note(SysEvent::TheoremDeleted, idx);
        ++pc_;
        break;
      }

      case kTokSetSwitchprog: {
        if (!charge(span)) break;
        uint64_t lo = ins.args[0], hi = ins.args[1];
        const Region& sp = m.regions().at(RegionId::Sp);
        const Region& sw = m.regions().at(RegionId::SwitchProg);
        if (lo < 1 || hi < lo || hi > sp.width()) {
          fail("set-switchprog: not a non-empty substring of sp");
          break;
        }
        uint32_t len = static_cast<uint32_t>(hi - lo + 1);
        if (len > sw.width()) {
          fail("set-switchprog: image exceeds switchprog region");
          break;
        }
        BitVec img = m.read_region(RegionId::Sp, sp.lo + static_cast<uint32_t>(lo) - 1,
                                   sp.lo + static_cast<uint32_t>(hi) - 1);
        img.resize(sw.width(), 0);
        m.write_region(RegionId::SwitchProg, sw.lo, sw.hi, img, Actor::Technique);
        ++pc_;
        break;
      }

      case kTokCheck: {
        if (!charge(1)) break;
        CheckResult r = check_and_maybe_switch(sys);
        if (r.outcome == CheckOutcome::Switched) {
          out_.status = RunStatus::Switched;
          break;
        }
        if (sys.life_over()) {
          fail("lifetime exhausted");
          break;
        }
        ++pc_;
        break;
      }

      case kTokState2Theorem: {
        uint64_t lo = ins.args[0], hi = ins.args[1];
        uint64_t span_words = hi >= lo ? (hi - lo + 1 + 15) / 16 : 0;
        if (!charge(span + time_words + span_words)) break;
        sys.tick(1);  // the readability protocol itself costs time
        if (sys.life_over()) {
          fail("lifetime exhausted");
          break;
        }
        bool readable = lo >= 1 && lo <= hi && hi <= m.regions().total_bits();
        if (readable) {
          // Fast variables (ip, parity) and the live clock are unreadable;
          // their snapshots in snapbuf are fair game.
          for (RegionId fast : {RegionId::Ip, RegionId::Parity, RegionId::Time}) {
            const Region& r = m.regions().at(fast);
            if (lo <= r.hi && hi >= r.lo) readable = false;
          }
        }
        if (!readable) {
          ++pc_;  // refusal: no further effect
          break;
        }
        sys.tick(time_words);  // reading time also costs time
        if (sys.life_over()) {
          fail("lifetime exhausted");
          break;
        }
        uint64_t t1 = m.cycle();
        BitVec z = m.read_abs(static_cast<uint32_t>(lo), static_cast<uint32_t>(hi));
        Provenance prov;
        prov.kind = Provenance::Kind::Observed;
        prov.observed_t1 = t1;
        const Theorem& t = proof.append(
            Formula::mk_bits_eq(static_cast<uint32_t>(lo), static_cast<uint32_t>(hi),
                                Term::mk_int(static_cast<long long>(t1)), bits_to_string(z)),
            prov, m, Actor::Technique);
        ++out_.proof_appended;
        sys.note(SysEvent::TheoremAppended, t.index);
        ++pc_;
        break;
      }

      case kTokLoadConst:
        if (!charge(span)) break;
        acc_ = ins.args[0];
        ++pc_;
        break;

      case kTokAdd:
        if (!charge(span)) break;
        acc_ += ins.args[0];
        ++pc_;
        break;

      case kTokSub:
        if (!charge(span)) break;
        if (ins.args[0] > acc_) {
          fail("arithmetic underflow");
          break;
        }
        acc_ -= ins.args[0];
        ++pc_;
        break;

      case kTokCopyToSp: {
        if (!charge(span)) break;
        const Region& sp = m.regions().at(RegionId::Sp);
        uint64_t w = ins.args[0];
        uint32_t word_size = m.spec().word_size;
        if ((w + 1) * word_size > sp.width()) {
          fail("copy-to-sp out of range");
          break;
        }
        m.write_region(RegionId::Sp, sp.lo + static_cast<uint32_t>(w) * word_size,
                       sp.lo + static_cast<uint32_t>(w + 1) * word_size - 1,
                       u64_to_bits(acc_, word_size), Actor::Technique);
        ++pc_;
        break;
      }

      case kTokCondSkip:
        if (!charge(span)) break;
        ++pc_;
        if (acc_ == 0) pc_ += ins.args[0];
        break;

      default:
        fail("bad token");
        break;
    }
  } catch (const ProofError& e) {
    fail(e.what());
  } catch (const MachineError& e) {
    fail(e.what());
  }
  return out_.status;
}

void TechniqueRun::undo(SystemCtx& sys) {
  if (!begun_ || out_.status == RunStatus::Switched) return;
  sys.life_rewind(mark_);
  begun_ = false;
}

uint64_t TechniqueRun::sig() const {
  uint64_t h = technique_hash(w_);
  h = fnv1a(&pc_, sizeof(pc_), h);
  h = fnv1a(&acc_, sizeof(acc_), h);
  h = fnv1a(&budget_, sizeof(budget_), h);
  h = fnv1a(&out_.steps_used, sizeof(out_.steps_used), h);
  uint8_t st = static_cast<uint8_t>(out_.status);
  return fnv1a(&st, 1, h);
}

RunOutcome run_technique(const Technique& w, uint64_t budget, SystemCtx& sys) {
  TechniqueRun run(w, budget);
  if (run.outcome().status == RunStatus::Error) return run.outcome();
  run.begin(sys);
  while (run.step(sys) == RunStatus::Running) {
  }
  return run.outcome();
}

}  // namespace selfproof
