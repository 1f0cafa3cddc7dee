// Copyright 2026 the selfproof authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0

#include "selfproof/technique.hpp"

#include <sstream>

namespace selfproof {

namespace {
constexpr int kArgCounts[kAlphabetSize] = {
    0,  // halt
    1,  // get-axiom n
    3,  // apply-rule k m n
    1,  // delete-theorem m
    2,  // set-switchprog m n
    0,  // check
    2,  // state2theorem m n
    1,  // load-const v
    1,  // add v
    1,  // sub v
    1,  // copy-to-sp w
    1,  // cond-skip v
};
constexpr const char* kMnemonics[kAlphabetSize] = {
    "halt",  "get-axiom", "apply-rule", "delete-theorem", "set-switchprog", "check",
    "state2theorem", "load-const", "add", "sub", "copy-to-sp", "cond-skip",
};
}  // namespace

int tok_arg_count(uint8_t tok) { return tok < kAlphabetSize ? kArgCounts[tok] : -1; }
const char* tok_mnemonic(uint8_t tok) { return tok < kAlphabetSize ? kMnemonics[tok] : "?"; }

void numeral_encode(uint64_t v, Technique& out) {
  if (v == 0) {
    out.push_back(0);
    return;
  }
  int j = 0;
  for (uint64_t x = v; x; x >>= 1) ++j;
  for (int i = 0; i < j; ++i) out.push_back(1);
  out.push_back(0);
  for (int i = j - 1; i >= 0; --i) out.push_back(static_cast<uint8_t>((v >> i) & 1));
}

size_t numeral_length(uint64_t v) {
  if (v == 0) return 1;
  size_t j = 0;
  for (uint64_t x = v; x; x >>= 1) ++j;
  return 2 * j + 1;
}

std::optional<uint64_t> numeral_decode(const Technique& w, size_t& pos) {
  size_t j = 0;
  while (pos < w.size() && w[pos] == 1) {
    ++j;
    ++pos;
  }
  if (pos >= w.size()) return std::nullopt;
  if (w[pos] != 0) return std::nullopt;  // token >= 2 inside a numeral
  ++pos;
  if (j == 0) return 0;
  if (j > 63) return std::nullopt;
  uint64_t v = 0;
  for (size_t i = 0; i < j; ++i) {
    if (pos >= w.size()) return std::nullopt;
    uint8_t d = w[pos++];
    if (d > 1) return std::nullopt;
    if (i == 0 && d != 1) return std::nullopt;  // canonical: leading digit is 1
    v = (v << 1) | d;
  }
  return v;
}

ParseState classify(const Technique& w) {
  size_t pos = 0;
  while (pos < w.size()) {
    uint8_t tok = w[pos];
    if (tok >= kAlphabetSize) return ParseState::Invalid;
    ++pos;
    if (tok == kTokHalt) return pos == w.size() ? ParseState::Complete : ParseState::Invalid;
    int nargs = kArgCounts[tok];
    for (int a = 0; a < nargs; ++a) {
      // Inline numeral parse with truncation detection.
      size_t j = 0;
      while (pos < w.size() && w[pos] == 1) {
        ++j;
        ++pos;
      }
      if (pos >= w.size()) return ParseState::ValidPrefix;
      if (w[pos] != 0) return ParseState::Invalid;
      ++pos;
      if (j > 16) return ParseState::Invalid;  // argument width cap
      for (size_t i = 0; i < j; ++i) {
        if (pos >= w.size()) return ParseState::ValidPrefix;
        uint8_t d = w[pos];
        if (d > 1) return ParseState::Invalid;
        if (i == 0 && d != 1) return ParseState::Invalid;
        ++pos;
      }
    }
  }
  return ParseState::ValidPrefix;  // more instructions expected (no halt yet)
}

std::optional<std::vector<Instr>> decode_technique(const Technique& w) {
  if (classify(w) != ParseState::Complete) return std::nullopt;
  std::vector<Instr> out;
  size_t pos = 0;
  while (pos < w.size()) {
    Instr ins;
    ins.tok = w[pos++];
    if (ins.tok == kTokHalt) {
      out.push_back(ins);
      break;
    }
    for (int a = 0; a < kArgCounts[ins.tok]; ++a) {
      auto v = numeral_decode(w, pos);
      if (!v) return std::nullopt;
      ins.args.push_back(*v);
    }
    out.push_back(std::move(ins));
  }
  return out;
}

Technique encode_technique(const std::vector<Instr>& instrs) {
  Technique w;
  for (const auto& ins : instrs) {
    w.push_back(ins.tok);
    for (uint64_t a : ins.args) numeral_encode(a, w);
  }
  return w;
}

Rat technique_prior(const Technique& w) {
  Rat p(1);
  for (size_t i = 0; i < w.size(); ++i) p /= kAlphabetSize;
  return p;
}

uint64_t technique_hash(const Technique& w) { return fnv1a(w.data(), w.size()); }

std::optional<Technique> technique_from_text(const std::string& text) {
  std::vector<Instr> instrs;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    auto cut = line.find(';');
    if (cut != std::string::npos) line = line.substr(0, cut);
    std::istringstream ls(line);
    std::string mn;
    if (!(ls >> mn)) continue;
    int tok = -1;
    for (int i = 0; i < kAlphabetSize; ++i)
      if (mn == kMnemonics[i]) tok = i;
    if (tok < 0) return std::nullopt;
    Instr ins;
    ins.tok = static_cast<uint8_t>(tok);
    for (int a = 0; a < kArgCounts[tok]; ++a) {
      uint64_t v;
      if (!(ls >> v)) return std::nullopt;
      ins.args.push_back(v);
    }
    instrs.push_back(std::move(ins));
  }
  Technique w = encode_technique(instrs);
  if (classify(w) != ParseState::Complete) return std::nullopt;
  return w;
}

std::string technique_to_text(const Technique& w) {
  auto instrs = decode_technique(w);
  if (!instrs) return "; <invalid technique>\n";
  std::string out;
  for (const auto& ins : *instrs) {
    out += kMnemonics[ins.tok];
    for (uint64_t a : ins.args) out += " " + std::to_string(a);
    out += "\n";
  }
  return out;
}

// --- enumeration ---------------------------------------------------------------

TechniqueEnumerator::TechniqueEnumerator(size_t max_len, Technique prefix)
    : max_len_(max_len), prefix_(std::move(prefix)) {}

std::optional<Technique> TechniqueEnumerator::next() {
  if (done_) return std::nullopt;
  for (;;) {
    if (descend_ && suffix_.size() < max_len_) {
      suffix_.push_back(0);
    } else {
      while (!suffix_.empty() && suffix_.back() == kAlphabetSize - 1) suffix_.pop_back();
      if (suffix_.empty()) {
        done_ = true;
        return std::nullopt;
      }
      ++suffix_.back();
    }
    Technique full = prefix_;
    full.insert(full.end(), suffix_.begin(), suffix_.end());
    switch (classify(full)) {
      case ParseState::Complete:
        descend_ = false;
        return full;
      case ParseState::ValidPrefix:
        descend_ = true;
        break;
      case ParseState::Invalid:
        descend_ = false;
        break;
    }
  }
}

uint64_t TechniqueEnumerator::sig() const {
  uint64_t h = fnv1a(suffix_.data(), suffix_.size());
  h = fnv1a(prefix_.data(), prefix_.size(), h);
  uint8_t flags = static_cast<uint8_t>((descend_ ? 1 : 0) | (done_ ? 2 : 0));
  h = fnv1a(&flags, 1, h);
  return fnv1a(&max_len_, sizeof(max_len_), h);
}

std::vector<Technique> all_techniques_up_to(size_t max_len) {
  std::vector<Technique> out;
  TechniqueEnumerator e(max_len);
  while (auto w = e.next()) out.push_back(*w);
  return out;
}

}  // namespace selfproof
