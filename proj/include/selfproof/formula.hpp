// Copyright 2026 the selfproof authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "selfproof/rational.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace selfproof {

// Decidable finite fragment: bounded quantifiers over explicit integer
// ranges, atoms over machine bit spans, exact rationals everywhere.

enum class Cmp : uint8_t { Lt, Le, Eq, Ge, Gt };
const char* cmp_symbol(Cmp c);
std::optional<Cmp> cmp_from_symbol(std::string_view s);
bool cmp_holds(const Rat& a, Cmp c, const Rat& b);

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  enum class Kind : uint8_t {
    Var,      // bound integer variable
    Lit,      // rational literal
    Plus,     // a + b
    Str2Num,  // big-endian value of s_{lo:hi}(t)
    Util,     // branch utility at t1: branch 1 = switch, 0 = continue search
  } kind;

  std::string var;            // Var
  Rat lit;                    // Lit
  TermPtr a, b;               // Plus
  uint32_t lo = 0, hi = 0;    // Str2Num span (absolute bit indices)
  TermPtr t;                  // Str2Num / Util time argument
  uint8_t branch = 0;         // Util

  static TermPtr mk_var(std::string name);
  static TermPtr mk_lit(Rat v);
  static TermPtr mk_int(long long v) { return mk_lit(Rat(v)); }
  static TermPtr mk_plus(TermPtr a, TermPtr b);
  static TermPtr mk_str2num(uint32_t lo, uint32_t hi, TermPtr t);
  static TermPtr mk_util(TermPtr t1, uint8_t branch);
};

// ---------------------------------------------------------------------------
// Formulas
// ---------------------------------------------------------------------------

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum class Kind : uint8_t {
    BitsEq,   // s_{lo:hi}(t) = bits
    NumCmp,   // a cmp b
    RewardEq, // R(t1, t2) = value (cumulative reward over [t1, t2])
    ProbCmp,  // P(s_{lo:hi}(t) = bits | history) cmp q
    UtilCmp,  // u(switch at t1) cmp u(continue search), cmp in {>, >=}
    Not,
    And,
    Or,
    Implies,
    Forall,   // bounded: var in [lo_bound, hi_bound]
    Exists,
  } kind;

  // atoms
  uint32_t lo = 0, hi = 0;
  TermPtr t1, t2;
  std::string bits;  // literal bitstring for BitsEq / ProbCmp event
  TermPtr a, b;      // NumCmp sides
  Rat value;         // RewardEq value / ProbCmp bound
  Cmp cmp = Cmp::Eq;

  // connectives / quantifiers
  FormulaPtr f, g;
  std::string var;
  long long lo_bound = 0, hi_bound = 0;

  static FormulaPtr mk_bits_eq(uint32_t lo, uint32_t hi, TermPtr t, std::string bits);
  static FormulaPtr mk_num_cmp(TermPtr a, Cmp c, TermPtr b);
  static FormulaPtr mk_reward_eq(TermPtr t1, TermPtr t2, Rat value);
  static FormulaPtr mk_prob_cmp(uint32_t lo, uint32_t hi, TermPtr t, std::string bits, Cmp c, Rat q);
  static FormulaPtr mk_util_cmp(TermPtr t1, Cmp c);
  static FormulaPtr mk_not(FormulaPtr f);
  static FormulaPtr mk_and(FormulaPtr f, FormulaPtr g);
  static FormulaPtr mk_or(FormulaPtr f, FormulaPtr g);
  static FormulaPtr mk_implies(FormulaPtr f, FormulaPtr g);
  static FormulaPtr mk_forall(std::string var, long long lo, long long hi, FormulaPtr body);
  static FormulaPtr mk_exists(std::string var, long long lo, long long hi, FormulaPtr body);
};

// Canonical serialization: lowercase s-expressions, single spaces, rationals
// as n or n/d, bitstrings prefixed with '#'. Round-trips bit-exactly.
std::string term_to_sexpr(const TermPtr& t);
std::string formula_to_sexpr(const FormulaPtr& f);
std::optional<FormulaPtr> formula_from_sexpr(std::string_view text);
std::optional<TermPtr> term_from_sexpr(std::string_view text);

// Node count (terms + formula nodes). Used by the step-cost table.
size_t term_size(const TermPtr& t);
size_t formula_size(const FormulaPtr& f);

// Structural equality via canonical text.
bool formula_equal(const FormulaPtr& a, const FormulaPtr& b);

// Substitutes integer value v for free variable `var`.
TermPtr term_subst(const TermPtr& t, const std::string& var, long long v);
FormulaPtr formula_subst(const FormulaPtr& f, const std::string& var, long long v);

// True when no free variables occur (all Vars are quantifier-bound).
bool formula_closed(const FormulaPtr& f);

// True when the formula mentions a Util term anywhere.
bool formula_mentions_util(const FormulaPtr& f);

}  // namespace selfproof
