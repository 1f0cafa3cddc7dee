// Copyright 2026 the selfproof authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "selfproof/environments.hpp"
#include "selfproof/formula.hpp"
#include "selfproof/machine.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace selfproof {

// ---------------------------------------------------------------------------
// Model access
// ---------------------------------------------------------------------------

// The intended finite model: the configured deterministic system. Lookups
// return nullopt when the context cannot answer (e.g. future cycles during
// live inference); evaluation then fails closed.
class ModelCtx {
 public:
  virtual ~ModelCtx() = default;
  virtual uint64_t horizon() const = 0;
  virtual std::optional<BitVec> bits_at(uint64_t t, uint32_t lo, uint32_t hi) = 0;
  virtual std::optional<Rat> reward_between(uint64_t t1, uint64_t t2) = 0;
  // P(s_{lo:hi}(t) = bits | realized history up to t-1).
  virtual std::optional<Rat> prob_of(uint64_t t, uint32_t lo, uint32_t hi,
                                     const std::string& bits) = 0;
  // Exact branch utilities at t1 (switch vs continue), when the context can
  // run the system forward. Used to evaluate UtilCmp / Util terms.
  virtual std::optional<std::pair<Rat, Rat>> branch_utilities(uint64_t t1) = 0;
};

// Exhaustive evaluation in the model; bounded quantifiers expand fully.
// Quantifier ranges are clipped to `clip_horizon` (0 = no clipping) so
// partial trajectories can be prefix-checked.
std::optional<bool> eval_formula(const FormulaPtr& f, ModelCtx& model, uint64_t clip_horizon = 0);
std::optional<Rat> eval_term(const TermPtr& t, ModelCtx& model);

// ---------------------------------------------------------------------------
// Axiom scheme
// ---------------------------------------------------------------------------

// n decodes as family = n mod 6, instance = n div 6.
enum class AxiomFamily : uint8_t {
  Hardware = 0,
  Reward = 1,
  Environment = 2,
  Uncertainty = 3,
  InitialState = 4,
  Utility = 5,
};

struct SchemeConfig {
  RegionTable regions;
  HardwareSpec hw;
  EnvSpec env;
  BitVec initial_bits;   // s(1), after p(1)/switchprog images are loaded
  BitVec e_image_bits;   // the e words of p(1), used by the ip-increment guard
  bool e_image_jump_free = false;
};

class AxiomScheme {
 public:
  explicit AxiomScheme(SchemeConfig cfg);

  // The n-th axiom, or nullopt (NotAnAxiom).
  std::optional<FormulaPtr> axiom(uint64_t n) const;

  // Inverse encoding: the index that would produce this exact formula, if any.
  std::optional<uint64_t> recognize(const FormulaPtr& f) const;

  const SchemeConfig& config() const { return cfg_; }

  // Per-family instance counts for the finite families (initial-state is
  // unbounded up to the pairing range).
  size_t family_size(AxiomFamily fam) const;

 private:
  std::optional<FormulaPtr> family_instance(AxiomFamily fam, uint64_t inst) const;
  std::optional<FormulaPtr> initial_state_instance(uint64_t inst) const;

  SchemeConfig cfg_;
  std::vector<FormulaPtr> hardware_;
  std::vector<FormulaPtr> reward_;
  std::vector<FormulaPtr> environment_;
  std::vector<FormulaPtr> uncertainty_;
  std::vector<FormulaPtr> utility_;
};

// ---------------------------------------------------------------------------
// Proof object
// ---------------------------------------------------------------------------

struct Provenance {
  enum class Kind : uint8_t { Axiom, Rule, Observed } kind = Kind::Axiom;
  uint64_t axiom_n = 0;                      // Axiom
  uint32_t rule_k = 0;                       // Rule
  uint64_t cite_m = 0, cite_n = 0;           // Rule premises (absolute indices)
  uint64_t observed_t1 = 0;                  // Observed
  std::optional<std::pair<Rat, Rat>> unfold_values;  // rule 0 evaluation record

  std::string tag() const;
};

struct Theorem {
  uint64_t index = 0;  // creation order, 1-based, never reused
  FormulaPtr formula;
  Provenance prov;
  bool tombstoned = false;
};

struct ProofError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotAnAxiom : ProofError {
  using ProofError::ProofError;
};
struct RuleInapplicable : ProofError {
  using ProofError::ProofError;
};
struct DeadReference : ProofError {
  using ProofError::ProofError;
};
struct ProofOverflow : ProofError {
  using ProofError::ProofError;
};

// Append-only theorem sequence with deletion tombstones, mirrored bit-exactly
// into the machine's proof region as canonical s-expression lines.
class Proof {
 public:
  const std::vector<Theorem>& entries() const { return entries_; }
  size_t live_count() const;
  const Theorem* last_live() const;
  const Theorem& at(uint64_t index) const;  // throws DeadReference / OutOfRange
  bool live(uint64_t index) const;

  // Appends and mirrors into the machine's proof region (throws ProofOverflow
  // if the serialization exceeds the region).
  const Theorem& append(FormulaPtr f, Provenance prov, Machine& m, Actor actor);
  void tombstone(uint64_t index, Machine& m, Actor actor);
  void pop_last(Machine& m, Actor actor);  // rolls back a tentative append
  void reset(Machine& m, Actor actor);

  std::string serialize() const;  // the exact region content (text form)
  std::string export_lines() const;  // one "<sexpr> ; <provenance>" line per entry

  static std::optional<Proof> import_lines(const std::string& text);

 private:
  void mirror(Machine& m, Actor actor);
  std::vector<Theorem> entries_;
};

// ---------------------------------------------------------------------------
// Inference
// ---------------------------------------------------------------------------

enum Rule : uint32_t {
  kRuleUnfold = 0,     // utility-unfolding; m = mode (0 strict, 1 relaxed)
  kRuleMp = 1,         // modus ponens with matching
  kRuleForallInst = 2, // bounded-forall instantiation; n = value
  kRuleAndIntro = 3,
  kRuleAndElim = 4,    // n = 0 (left) / 1 (right)
  kRuleClosedEval = 5, // evaluates the closed-atom antecedent of theorem m
  kRuleCount = 6,
};

// Context available to rule applications during live inference.
struct InferCtx {
  ModelCtx* model = nullptr;        // for closed-atom evaluation
  // Unfold evaluation callback: computes exact branch utilities at t1 with
  // the conclusion already appended (see technique VM). Returns false when
  // evaluation is unavailable.
  std::function<bool(uint64_t t1, bool relaxed, Rat& u_switch, Rat& u_continue)> unfold;
  uint64_t now = 0;
  uint64_t horizon = 0;
  uint32_t unfold_headroom = 64;
};

// Pure structural part: computes the conclusion of rule k on premises without
// touching the proof. Unfold (rule 0) is excluded — the technique VM drives it.
FormulaPtr rule_conclusion(uint32_t rule_k, const FormulaPtr& fm, const FormulaPtr& fn,
                           uint64_t n_value);

// Applies rule k to entries m and n, appending the conclusion.
// For kRuleForallInst / kRuleAndElim, `n` is a value, not an index.
const Theorem& infer(uint32_t rule_k, uint64_t m, uint64_t n, Proof& proof, Machine& machine,
                     InferCtx& ctx, Actor actor = Actor::Technique);

// Target-theorem recognition: returns t1 iff the formula matches the target
// pattern of the requested mode exactly.
enum class TargetMode : uint8_t { Strict, Relaxed };
std::optional<uint64_t> is_target_theorem(const FormulaPtr& f, TargetMode mode);

// Builds the target formula for a given t1/mode.
FormulaPtr make_target(uint64_t t1, TargetMode mode);

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

struct VerifyOptions {
  // With a model: full semantic re-check. Without: structural only.
  ModelCtx* model = nullptr;
  uint64_t clip_horizon = 0;  // prefix-check bound for quantified formulas
};

struct VerifyResult {
  bool ok = true;
  std::string first_error;
  size_t checked = 0;
};

VerifyResult verify_proof(const Proof& proof, const AxiomScheme& scheme, const VerifyOptions& opt);

}  // namespace selfproof
