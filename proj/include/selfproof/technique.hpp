// Copyright 2026 the selfproof authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "selfproof/bits.hpp"
#include "selfproof/rational.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace selfproof {

// The proof-technique language L: K = 12 instruction tokens. Integer
// arguments are self-delimiting numerals spliced into the token stream
// (unary length prefix over token 1, terminator token 0, then the binary
// digits as tokens 0/1 with a leading 1). A program ends at its first
// top-level `halt`, which makes the set of valid techniques prefix-free.
enum Tok : uint8_t {
  kTokHalt = 0,
  kTokGetAxiom = 1,
  kTokApplyRule = 2,
  kTokDelete = 3,
  kTokSetSwitchprog = 4,
  kTokCheck = 5,
  kTokState2Theorem = 6,
  kTokLoadConst = 7,
  kTokAdd = 8,
  kTokSub = 9,
  kTokCopyToSp = 10,
  kTokCondSkip = 11,
};

constexpr int kAlphabetSize = 12;

using Technique = std::vector<uint8_t>;

// Argument count per instruction token.
int tok_arg_count(uint8_t tok);
const char* tok_mnemonic(uint8_t tok);

// Numeral codec.
void numeral_encode(uint64_t v, Technique& out);
size_t numeral_length(uint64_t v);
// Decodes a numeral starting at `pos`; advances pos. nullopt = malformed or
// truncated.
std::optional<uint64_t> numeral_decode(const Technique& w, size_t& pos);

enum class ParseState : uint8_t { Complete, ValidPrefix, Invalid };
ParseState classify(const Technique& w);

// Decoded instruction stream.
struct Instr {
  uint8_t tok;
  std::vector<uint64_t> args;
};
std::optional<std::vector<Instr>> decode_technique(const Technique& w);
Technique encode_technique(const std::vector<Instr>& instrs);

// P(w) = K^-l(w); helpers work in exact integers.
inline size_t technique_length(const Technique& w) { return w.size(); }
Rat technique_prior(const Technique& w);
uint64_t technique_hash(const Technique& w);

// Assembly text: one instruction per line, e.g. "apply-rule 0 0 0".
// Lines starting with ';' are comments.
std::optional<Technique> technique_from_text(const std::string& text);
std::string technique_to_text(const Technique& w);

// ---------------------------------------------------------------------------
// Lexicographic enumeration of valid techniques
// ---------------------------------------------------------------------------

// Depth-first walk over the token tree in token order; prefix-freeness makes
// preorder emission equal to lexicographic order over complete programs.
// Value type: copying the enumerator snapshots the cursor.
class TechniqueEnumerator {
 public:
  explicit TechniqueEnumerator(size_t max_len, Technique prefix = {});

  // Next complete technique with length <= max_len (suffix length, when a
  // prefix is set), or nullopt when exhausted.
  std::optional<Technique> next();

  uint64_t sig() const;

 private:
  size_t max_len_;
  Technique prefix_;   // frozen continuation prefix (freeze-reuse mode)
  Technique suffix_;   // DFS cursor
  bool descend_ = true;
  bool done_ = false;
};

// Exhaustive list of valid techniques up to the given length (tests/Kraft).
std::vector<Technique> all_techniques_up_to(size_t max_len);

}  // namespace selfproof
