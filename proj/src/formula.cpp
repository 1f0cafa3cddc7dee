// Copyright 2026 the selfproof authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0

#include "selfproof/formula.hpp"

#include <cctype>
#include <sstream>

namespace selfproof {

const char* cmp_symbol(Cmp c) {
  switch (c) {
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Eq: return "=";
    case Cmp::Ge: return ">=";
    case Cmp::Gt: return ">";
  }
  return "?";
}

std::optional<Cmp> cmp_from_symbol(std::string_view s) {
  if (s == "<") return Cmp::Lt;
  if (s == "<=") return Cmp::Le;
  if (s == "=") return Cmp::Eq;
  if (s == ">=") return Cmp::Ge;
  if (s == ">") return Cmp::Gt;
  return std::nullopt;
}

bool cmp_holds(const Rat& a, Cmp c, const Rat& b) {
  switch (c) {
    case Cmp::Lt: return a < b;
    case Cmp::Le: return a <= b;
    case Cmp::Eq: return a == b;
    case Cmp::Ge: return a >= b;
    case Cmp::Gt: return a > b;
  }
  return false;
}

// --- term constructors -------------------------------------------------------

TermPtr Term::mk_var(std::string name) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Var;
  t->var = std::move(name);
  return t;
}
TermPtr Term::mk_lit(Rat v) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Lit;
  t->lit = std::move(v);
  return t;
}
TermPtr Term::mk_plus(TermPtr a, TermPtr b) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Plus;
  t->a = std::move(a);
  t->b = std::move(b);
  return t;
}
TermPtr Term::mk_str2num(uint32_t lo, uint32_t hi, TermPtr time) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Str2Num;
  t->lo = lo;
  t->hi = hi;
  t->t = std::move(time);
  return t;
}
TermPtr Term::mk_util(TermPtr t1, uint8_t branch) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Util;
  t->t = std::move(t1);
  t->branch = branch;
  return t;
}

// --- formula constructors ----------------------------------------------------

FormulaPtr Formula::mk_bits_eq(uint32_t lo, uint32_t hi, TermPtr t, std::string bits) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::BitsEq;
  f->lo = lo;
  f->hi = hi;
  f->t1 = std::move(t);
  f->bits = std::move(bits);
  return f;
}
FormulaPtr Formula::mk_num_cmp(TermPtr a, Cmp c, TermPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::NumCmp;
  f->a = std::move(a);
  f->cmp = c;
  f->b = std::move(b);
  return f;
}
FormulaPtr Formula::mk_reward_eq(TermPtr t1, TermPtr t2, Rat value) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::RewardEq;
  f->t1 = std::move(t1);
  f->t2 = std::move(t2);
  f->value = std::move(value);
  return f;
}
FormulaPtr Formula::mk_prob_cmp(uint32_t lo, uint32_t hi, TermPtr t, std::string bits, Cmp c, Rat q) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::ProbCmp;
  f->lo = lo;
  f->hi = hi;
  f->t1 = std::move(t);
  f->bits = std::move(bits);
  f->cmp = c;
  f->value = std::move(q);
  return f;
}
FormulaPtr Formula::mk_util_cmp(TermPtr t1, Cmp c) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::UtilCmp;
  f->t1 = std::move(t1);
  f->cmp = c;
  return f;
}
FormulaPtr Formula::mk_not(FormulaPtr x) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Not;
  f->f = std::move(x);
  return f;
}
FormulaPtr Formula::mk_and(FormulaPtr x, FormulaPtr y) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::And;
  f->f = std::move(x);
  f->g = std::move(y);
  return f;
}
FormulaPtr Formula::mk_or(FormulaPtr x, FormulaPtr y) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Or;
  f->f = std::move(x);
  f->g = std::move(y);
  return f;
}
FormulaPtr Formula::mk_implies(FormulaPtr x, FormulaPtr y) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Implies;
  f->f = std::move(x);
  f->g = std::move(y);
  return f;
}
FormulaPtr Formula::mk_forall(std::string var, long long lo, long long hi, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Forall;
  f->var = std::move(var);
  f->lo_bound = lo;
  f->hi_bound = hi;
  f->f = std::move(body);
  return f;
}
FormulaPtr Formula::mk_exists(std::string var, long long lo, long long hi, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Exists;
  f->var = std::move(var);
  f->lo_bound = lo;
  f->hi_bound = hi;
  f->f = std::move(body);
  return f;
}

// --- serialization -----------------------------------------------------------

std::string term_to_sexpr(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Var: return "(var " + t->var + ")";
    case Term::Kind::Lit: return rat_to_string(t->lit);
    case Term::Kind::Plus: return "(+ " + term_to_sexpr(t->a) + " " + term_to_sexpr(t->b) + ")";
    case Term::Kind::Str2Num:
      return "(s2n " + std::to_string(t->lo) + " " + std::to_string(t->hi) + " " +
             term_to_sexpr(t->t) + ")";
    case Term::Kind::Util:
      return "(util " + term_to_sexpr(t->t) + " " + std::to_string(int(t->branch)) + ")";
  }
  return "?";
}

std::string formula_to_sexpr(const FormulaPtr& f) {
  using K = Formula::Kind;
  switch (f->kind) {
    case K::BitsEq:
      return "(bitseq " + std::to_string(f->lo) + " " + std::to_string(f->hi) + " " +
             term_to_sexpr(f->t1) + " #" + f->bits + ")";
    case K::NumCmp:
      return "(numcmp " + term_to_sexpr(f->a) + " " + cmp_symbol(f->cmp) + " " +
             term_to_sexpr(f->b) + ")";
    case K::RewardEq:
      return "(rewardeq " + term_to_sexpr(f->t1) + " " + term_to_sexpr(f->t2) + " " +
             rat_to_string(f->value) + ")";
    case K::ProbCmp:
      return "(probcmp " + std::to_string(f->lo) + " " + std::to_string(f->hi) + " " +
             term_to_sexpr(f->t1) + " #" + f->bits + " " + cmp_symbol(f->cmp) + " " +
             rat_to_string(f->value) + ")";
    case K::UtilCmp:
      return "(utilcmp " + term_to_sexpr(f->t1) + " " + cmp_symbol(f->cmp) + ")";
    case K::Not: return "(not " + formula_to_sexpr(f->f) + ")";
    case K::And: return "(and " + formula_to_sexpr(f->f) + " " + formula_to_sexpr(f->g) + ")";
    case K::Or: return "(or " + formula_to_sexpr(f->f) + " " + formula_to_sexpr(f->g) + ")";
    case K::Implies:
      return "(implies " + formula_to_sexpr(f->f) + " " + formula_to_sexpr(f->g) + ")";
    case K::Forall:
      return "(forall " + f->var + " " + std::to_string(f->lo_bound) + " " +
             std::to_string(f->hi_bound) + " " + formula_to_sexpr(f->f) + ")";
    case K::Exists:
      return "(exists " + f->var + " " + std::to_string(f->lo_bound) + " " +
             std::to_string(f->hi_bound) + " " + formula_to_sexpr(f->f) + ")";
  }
  return "?";
}

// --- parsing -----------------------------------------------------------------

namespace {

struct Parser {
  std::string_view s;
  size_t at = 0;
  bool ok = true;

  void skip() {
    while (at < s.size() && std::isspace(static_cast<unsigned char>(s[at]))) ++at;
  }
  bool eat(char c) {
    skip();
    if (at < s.size() && s[at] == c) {
      ++at;
      return true;
    }
    ok = false;
    return false;
  }
  std::string token() {
    skip();
    size_t start = at;
    while (at < s.size() && !std::isspace(static_cast<unsigned char>(s[at])) && s[at] != '(' &&
           s[at] != ')')
      ++at;
    if (at == start) ok = false;
    return std::string(s.substr(start, at - start));
  }
  std::optional<long long> int_token() {
    std::string t = token();
    if (!ok || t.empty()) return std::nullopt;
    try {
      size_t pos = 0;
      long long v = std::stoll(t, &pos);
      if (pos != t.size()) return std::nullopt;
      return v;
    } catch (...) {
      return std::nullopt;
    }
  }

  TermPtr term() {
    skip();
    if (at >= s.size()) {
      ok = false;
      return nullptr;
    }
    if (s[at] != '(') {
      std::string t = token();
      auto r = rat_parse(t);
      if (!r) {
        ok = false;
        return nullptr;
      }
      return Term::mk_lit(*r);
    }
    eat('(');
    std::string head = token();
    if (!ok) return nullptr;
    TermPtr result;
    if (head == "var") {
      std::string name = token();
      result = Term::mk_var(name);
    } else if (head == "+") {
      TermPtr a = term();
      TermPtr b = term();
      if (ok) result = Term::mk_plus(a, b);
    } else if (head == "s2n") {
      auto lo = int_token();
      auto hi = int_token();
      TermPtr t = term();
      if (ok && lo && hi && *lo >= 0 && *hi >= *lo)
        result = Term::mk_str2num(static_cast<uint32_t>(*lo), static_cast<uint32_t>(*hi), t);
      else
        ok = false;
    } else if (head == "util") {
      TermPtr t = term();
      auto b = int_token();
      if (ok && b && (*b == 0 || *b == 1))
        result = Term::mk_util(t, static_cast<uint8_t>(*b));
      else
        ok = false;
    } else {
      ok = false;
    }
    if (!eat(')')) return nullptr;
    return ok ? result : nullptr;
  }

  std::string bits_token() {
    skip();
    if (at >= s.size() || s[at] != '#') {
      ok = false;
      return {};
    }
    ++at;
    size_t start = at;
    while (at < s.size() && (s[at] == '0' || s[at] == '1')) ++at;
    return std::string(s.substr(start, at - start));
  }

  std::optional<Cmp> cmp_token() {
    std::string t = token();
    if (!ok) return std::nullopt;
    return cmp_from_symbol(t);
  }

  std::optional<Rat> rat_token() {
    std::string t = token();
    if (!ok) return std::nullopt;
    return rat_parse(t);
  }

  FormulaPtr formula() {
    if (!eat('(')) return nullptr;
    std::string head = token();
    if (!ok) return nullptr;
    FormulaPtr result;
    if (head == "bitseq") {
      auto lo = int_token();
      auto hi = int_token();
      TermPtr t = term();
      std::string bits = bits_token();
      if (ok && lo && hi && *lo >= 1 && *hi >= *lo &&
          bits.size() == static_cast<size_t>(*hi - *lo + 1))
        result = Formula::mk_bits_eq(static_cast<uint32_t>(*lo), static_cast<uint32_t>(*hi), t, bits);
      else
        ok = false;
    } else if (head == "numcmp") {
      TermPtr a = term();
      auto c = cmp_token();
      TermPtr b = term();
      if (ok && c) result = Formula::mk_num_cmp(a, *c, b);
      else ok = false;
    } else if (head == "rewardeq") {
      TermPtr t1 = term();
      TermPtr t2 = term();
      auto v = rat_token();
      if (ok && v) result = Formula::mk_reward_eq(t1, t2, *v);
      else ok = false;
    } else if (head == "probcmp") {
      auto lo = int_token();
      auto hi = int_token();
      TermPtr t = term();
      std::string bits = bits_token();
      auto c = cmp_token();
      auto q = rat_token();
      if (ok && lo && hi && c && q && *lo >= 1 && *hi >= *lo &&
          bits.size() == static_cast<size_t>(*hi - *lo + 1))
        result = Formula::mk_prob_cmp(static_cast<uint32_t>(*lo), static_cast<uint32_t>(*hi), t,
                                      bits, *c, *q);
      else
        ok = false;
    } else if (head == "utilcmp") {
      TermPtr t1 = term();
      auto c = cmp_token();
      if (ok && c && (*c == Cmp::Gt || *c == Cmp::Ge)) result = Formula::mk_util_cmp(t1, *c);
      else ok = false;
    } else if (head == "not") {
      FormulaPtr f = formula();
      if (ok) result = Formula::mk_not(f);
    } else if (head == "and" || head == "or" || head == "implies") {
      FormulaPtr f = formula();
      FormulaPtr g = formula();
      if (ok) {
        if (head == "and") result = Formula::mk_and(f, g);
        else if (head == "or") result = Formula::mk_or(f, g);
        else result = Formula::mk_implies(f, g);
      }
    } else if (head == "forall" || head == "exists") {
      std::string var = token();
      auto lo = int_token();
      auto hi = int_token();
      FormulaPtr body = formula();
      if (ok && lo && hi) {
        if (head == "forall") result = Formula::mk_forall(var, *lo, *hi, body);
        else result = Formula::mk_exists(var, *lo, *hi, body);
      } else
        ok = false;
    } else {
      ok = false;
    }
    if (!eat(')')) return nullptr;
    return ok ? result : nullptr;
  }
};

}  // namespace

std::optional<FormulaPtr> formula_from_sexpr(std::string_view text) {
  Parser p{text};
  FormulaPtr f = p.formula();
  p.skip();
  if (!p.ok || !f || p.at != text.size()) return std::nullopt;
  return f;
}

std::optional<TermPtr> term_from_sexpr(std::string_view text) {
  Parser p{text};
  TermPtr t = p.term();
  p.skip();
  if (!p.ok || !t || p.at != text.size()) return std::nullopt;
  return t;
}

// --- traversal helpers ---------------------------------------------------------

size_t term_size(const TermPtr& t) {
  if (!t) return 0;
  switch (t->kind) {
    case Term::Kind::Var:
    case Term::Kind::Lit: return 1;
    case Term::Kind::Plus: return 1 + term_size(t->a) + term_size(t->b);
    case Term::Kind::Str2Num: return 1 + term_size(t->t);
    case Term::Kind::Util: return 1 + term_size(t->t);
  }
  return 1;
}

size_t formula_size(const FormulaPtr& f) {
  if (!f) return 0;
  using K = Formula::Kind;
  switch (f->kind) {
    case K::BitsEq: return 1 + term_size(f->t1);
    case K::NumCmp: return 1 + term_size(f->a) + term_size(f->b);
    case K::RewardEq: return 1 + term_size(f->t1) + term_size(f->t2);
    case K::ProbCmp: return 1 + term_size(f->t1);
    case K::UtilCmp: return 1 + term_size(f->t1);
    case K::Not: return 1 + formula_size(f->f);
    case K::And:
    case K::Or:
    case K::Implies: return 1 + formula_size(f->f) + formula_size(f->g);
    case K::Forall:
    case K::Exists: return 1 + formula_size(f->f);
  }
  return 1;
}

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (!a || !b) return a == b;
  return formula_to_sexpr(a) == formula_to_sexpr(b);
}

TermPtr term_subst(const TermPtr& t, const std::string& var, long long v) {
  if (!t) return t;
  switch (t->kind) {
    case Term::Kind::Var:
      if (t->var == var) return Term::mk_int(v);
      return t;
    case Term::Kind::Lit: return t;
    case Term::Kind::Plus:
      return Term::mk_plus(term_subst(t->a, var, v), term_subst(t->b, var, v));
    case Term::Kind::Str2Num:
      return Term::mk_str2num(t->lo, t->hi, term_subst(t->t, var, v));
    case Term::Kind::Util:
      return Term::mk_util(term_subst(t->t, var, v), t->branch);
  }
  return t;
}

FormulaPtr formula_subst(const FormulaPtr& f, const std::string& var, long long v) {
  if (!f) return f;
  using K = Formula::Kind;
  switch (f->kind) {
    case K::BitsEq: return Formula::mk_bits_eq(f->lo, f->hi, term_subst(f->t1, var, v), f->bits);
    case K::NumCmp:
      return Formula::mk_num_cmp(term_subst(f->a, var, v), f->cmp, term_subst(f->b, var, v));
    case K::RewardEq:
      return Formula::mk_reward_eq(term_subst(f->t1, var, v), term_subst(f->t2, var, v), f->value);
    case K::ProbCmp:
      return Formula::mk_prob_cmp(f->lo, f->hi, term_subst(f->t1, var, v), f->bits, f->cmp, f->value);
    case K::UtilCmp: return Formula::mk_util_cmp(term_subst(f->t1, var, v), f->cmp);
    case K::Not: return Formula::mk_not(formula_subst(f->f, var, v));
    case K::And: return Formula::mk_and(formula_subst(f->f, var, v), formula_subst(f->g, var, v));
    case K::Or: return Formula::mk_or(formula_subst(f->f, var, v), formula_subst(f->g, var, v));
    case K::Implies:
      return Formula::mk_implies(formula_subst(f->f, var, v), formula_subst(f->g, var, v));
    case K::Forall:
    case K::Exists: {
      if (f->var == var) return f;  // shadowed
      FormulaPtr body = formula_subst(f->f, var, v);
      if (f->kind == K::Forall) return Formula::mk_forall(f->var, f->lo_bound, f->hi_bound, body);
      return Formula::mk_exists(f->var, f->lo_bound, f->hi_bound, body);
    }
  }
  return f;
}

namespace {
bool term_has_free(const TermPtr& t, const std::vector<std::string>& bound) {
  if (!t) return false;
  switch (t->kind) {
    case Term::Kind::Var:
      for (const auto& b : bound)
        if (b == t->var) return false;
      return true;
    case Term::Kind::Lit: return false;
    case Term::Kind::Plus: return term_has_free(t->a, bound) || term_has_free(t->b, bound);
    case Term::Kind::Str2Num:
    case Term::Kind::Util: return term_has_free(t->t, bound);
  }
  return false;
}

bool formula_has_free(const FormulaPtr& f, std::vector<std::string>& bound) {
  if (!f) return false;
  using K = Formula::Kind;
  switch (f->kind) {
    case K::BitsEq: return term_has_free(f->t1, bound);
    case K::NumCmp: return term_has_free(f->a, bound) || term_has_free(f->b, bound);
    case K::RewardEq: return term_has_free(f->t1, bound) || term_has_free(f->t2, bound);
    case K::ProbCmp: return term_has_free(f->t1, bound);
    case K::UtilCmp: return term_has_free(f->t1, bound);
    case K::Not: return formula_has_free(f->f, bound);
    case K::And:
    case K::Or:
    case K::Implies: return formula_has_free(f->f, bound) || formula_has_free(f->g, bound);
    case K::Forall:
    case K::Exists: {
      bound.push_back(f->var);
      bool r = formula_has_free(f->f, bound);
      bound.pop_back();
      return r;
    }
  }
  return false;
}

bool term_mentions_util(const TermPtr& t) {
  if (!t) return false;
  switch (t->kind) {
    case Term::Kind::Util: return true;
    case Term::Kind::Plus: return term_mentions_util(t->a) || term_mentions_util(t->b);
    case Term::Kind::Str2Num: return term_mentions_util(t->t);
    default: return false;
  }
}
}  // namespace

bool formula_closed(const FormulaPtr& f) {
  std::vector<std::string> bound;
  return !formula_has_free(f, bound);
}

bool formula_mentions_util(const FormulaPtr& f) {
  if (!f) return false;
  using K = Formula::Kind;
  switch (f->kind) {
    case K::UtilCmp: return true;
    case K::NumCmp: return term_mentions_util(f->a) || term_mentions_util(f->b);
    case K::BitsEq:
    case K::ProbCmp: return term_mentions_util(f->t1);
    case K::RewardEq: return term_mentions_util(f->t1) || term_mentions_util(f->t2);
    case K::Not: return formula_mentions_util(f->f);
    case K::And:
    case K::Or:
    case K::Implies: return formula_mentions_util(f->f) || formula_mentions_util(f->g);
    case K::Forall:
    case K::Exists: return formula_mentions_util(f->f);
  }
  return false;
}

}  // namespace selfproof
