// Copyright 2026 the selfproof authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0

#include "selfproof/machine.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

namespace selfproof {

namespace {
constexpr std::array<const char*, kRegionCount> kNames = {
    "time", "ip", "parity", "switchbit", "acc",       "snapbuf",
    "x",    "y",  "p",      "sp",        "proof",     "switchprog"};
}  // namespace

const char* region_name(RegionId id) { return kNames[static_cast<size_t>(id)]; }

std::optional<RegionId> region_from_name(std::string_view name) {
  for (size_t i = 0; i < kNames.size(); ++i)
    if (name == kNames[i]) return static_cast<RegionId>(i);
  return std::nullopt;
}

RegionTable RegionTable::standard(const Sizes& sizes, uint32_t word_size) {
  std::vector<Region> rs;
  uint32_t at = 1;
  auto add = [&](RegionId id, uint32_t width, WriteLevel level) {
    rs.push_back(Region{id, at, at + width - 1, level});
    at += width;
  };
  add(RegionId::Time, sizes.time, WriteLevel::HardwareOnly);
  add(RegionId::Ip, word_size, WriteLevel::HardwareOnly);
  add(RegionId::Parity, 1, WriteLevel::HardwareOnly);
  add(RegionId::SwitchBit, 1, WriteLevel::HardwareOnly);
  add(RegionId::Acc, word_size, WriteLevel::SwitchprogWritable);
  add(RegionId::SnapBuf, word_size + 1, WriteLevel::HardwareOnly);
  add(RegionId::X, sizes.x, WriteLevel::HardwareOnly);
  add(RegionId::Y, sizes.y, WriteLevel::SwitchprogWritable);
  add(RegionId::P, sizes.p_words * word_size, WriteLevel::SwitchprogWritable);
  add(RegionId::Sp, sizes.sp_words * word_size, WriteLevel::TechniqueWritable);
  add(RegionId::Proof, sizes.proof, WriteLevel::TechniqueWritable);
  add(RegionId::SwitchProg, sizes.switchprog_words * word_size, WriteLevel::TechniqueWritable);
  return custom(std::move(rs));
}

RegionTable RegionTable::custom(std::vector<Region> regions) {
  RegionTable t;
  std::array<bool, kRegionCount> seen{};
  uint32_t max_hi = 0;
  for (const auto& r : regions) {
    if (r.lo < 1 || r.hi < r.lo) throw OutOfRange("bad region span: " + std::string(region_name(r.id)));
    if (seen[static_cast<size_t>(r.id)]) throw MachineError("duplicate region");
    seen[static_cast<size_t>(r.id)] = true;
    max_hi = std::max(max_hi, r.hi);
  }
  for (bool s : seen)
    if (!s) throw MachineError("region table must cover all named regions");
  auto sorted = regions;
  std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.lo < b.lo; });
  for (size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].lo <= sorted[i - 1].hi) throw MachineError("overlapping regions");
  for (const auto& r : regions) t.regions_[static_cast<size_t>(r.id)] = r;
  t.ordered_ = std::move(sorted);
  t.total_bits_ = max_hi;
  return t;
}

std::optional<RegionId> RegionTable::region_of(uint32_t abs_bit) const {
  for (const auto& r : ordered_)
    if (abs_bit >= r.lo && abs_bit <= r.hi) return r.id;
  return std::nullopt;
}

Opcode decode_opcode(uint16_t word) {
  uint8_t op = static_cast<uint8_t>(word >> 12);
  if (op > 8) return Opcode::Nop;
  return static_cast<Opcode>(op);
}

uint16_t encode_instr(Opcode op, uint16_t operand) {
  return static_cast<uint16_t>((static_cast<uint16_t>(op) << 12) | (operand & 0x0fff));
}

Machine::Machine(RegionTable table, HardwareSpec spec)
    : table_(std::move(table)), spec_(spec), bits_(table_.total_bits(), 0) {
  if (spec_.word_size != 16) throw MachineError("word_size 16 is the supported default");
  encode_time();
  write_region_value(RegionId::Parity, cycle_ & 1, Actor::Hardware);
  journal_.clear();  // construction-time encodings are not undoable events
}

BitVec Machine::read_abs(uint32_t lo, uint32_t hi) const {
  if (lo < 1 || hi > bits_.size() || lo > hi) throw OutOfRange("read_abs out of range");
  return BitVec(bits_.begin() + lo - 1, bits_.begin() + hi);
}

BitVec Machine::read_region(RegionId id, uint32_t lo, uint32_t hi) const {
  const Region& r = table_.at(id);
  if (lo < r.lo || hi > r.hi || lo > hi) throw OutOfRange("read_region outside span");
  return read_abs(lo, hi);
}

BitVec Machine::read_region(RegionId id) const {
  const Region& r = table_.at(id);
  return read_abs(r.lo, r.hi);
}

uint64_t Machine::region_value(RegionId id) const { return bits_to_u64(read_region(id)); }

void Machine::check_writable(uint32_t lo, uint32_t hi, Actor actor) const {
  if (actor == Actor::Hardware) return;
  // Every touched bit must belong to a region the actor may write.
  for (uint32_t b = lo; b <= hi;) {
    auto id = table_.region_of(b);
    if (!id) throw IllegalWrite("write outside any region");
    const Region& r = table_.at(*id);
    bool ok = false;
    if (actor == Actor::Technique) ok = r.level == WriteLevel::TechniqueWritable;
    else ok = r.level != WriteLevel::HardwareOnly;
    if (!ok)
      throw IllegalWrite(std::string("actor may not write region ") + region_name(*id));
    b = r.hi + 1;
  }
}

void Machine::raw_write(uint32_t lo, const BitVec& bits, bool journal) {
  if (lo < 1 || lo - 1 + bits.size() > bits_.size()) throw OutOfRange("write out of range");
  if (journal) {
    JournalEntry e;
    e.lo = lo;
    e.old_bits.assign(bits_.begin() + lo - 1, bits_.begin() + lo - 1 + bits.size());
    journal_.push_back(std::move(e));
  }
  std::copy(bits.begin(), bits.end(), bits_.begin() + lo - 1);
}

void Machine::write_abs(uint32_t lo, const BitVec& bits, Actor actor) {
  if (bits.empty()) return;
  check_writable(lo, lo + static_cast<uint32_t>(bits.size()) - 1, actor);
  raw_write(lo, bits, true);
}

void Machine::write_region(RegionId id, uint32_t lo, uint32_t hi, const BitVec& bits, Actor actor) {
  const Region& r = table_.at(id);
  if (lo < r.lo || hi > r.hi || lo > hi) throw OutOfRange("write_region outside span");
  if (bits.size() != hi - lo + 1) throw OutOfRange("bits length != span");
  write_abs(lo, bits, actor);
}

void Machine::write_region_value(RegionId id, uint64_t value, Actor actor) {
  const Region& r = table_.at(id);
  write_region(id, r.lo, r.hi, u64_to_bits(value, r.width()), actor);
}

void Machine::rewind_to(const JournalMark& m) {
  if (m.journal_len > journal_.size()) throw MachineError("mark is newer than journal");
  while (journal_.size() > m.journal_len) {
    const JournalEntry& e = journal_.back();
    std::copy(e.old_bits.begin(), e.old_bits.end(), bits_.begin() + e.lo - 1);
    journal_.pop_back();
  }
  cycle_ = m.cycle;
  input_requested_ = m.input_requested;
  encode_time();
}

void Machine::forget_before(const JournalMark& m) {
  if (m.journal_len >= journal_.size()) {
    journal_.clear();
    return;
  }
  journal_.erase(journal_.begin(), journal_.begin() + m.journal_len);
}

void Machine::encode_time() {
  const Region& r = table_.at(RegionId::Time);
  raw_write(r.lo, u64_to_bits(cycle_, r.width()), false);
}

void Machine::maybe_snapshot() {
  if (spec_.snapshot_period == 0 || cycle_ % spec_.snapshot_period != 0) return;
  const Region& snap = table_.at(RegionId::SnapBuf);
  BitVec ip = read_region(RegionId::Ip);
  BitVec par = read_region(RegionId::Parity);
  BitVec both = ip;
  both.insert(both.end(), par.begin(), par.end());
  if (both.size() > snap.width()) both.resize(snap.width());
  raw_write(snap.lo, both, true);
}

uint16_t Machine::word(RegionId id, uint32_t w) const {
  const Region& r = table_.at(id);
  uint32_t lo = r.lo + w * spec_.word_size;
  if (lo + spec_.word_size - 1 > r.hi) throw OutOfRange("word index outside region");
  return static_cast<uint16_t>(bits_to_u64(read_abs(lo, lo + spec_.word_size - 1)));
}

void Machine::set_word(RegionId id, uint32_t w, uint16_t value, Actor actor) {
  const Region& r = table_.at(id);
  uint32_t lo = r.lo + w * spec_.word_size;
  if (lo + spec_.word_size - 1 > r.hi) throw OutOfRange("word index outside region");
  write_abs(lo, u64_to_bits(value, spec_.word_size), actor);
}

uint16_t Machine::setting(uint32_t idx) const { return word(RegionId::P, spec_.e_words + idx); }

void Machine::poke_setting(uint32_t idx, uint16_t value) {
  set_word(RegionId::P, spec_.e_words + idx, value, Actor::Hardware);
}

Machine::StepResult Machine::step(const std::optional<BitVec>& env_input) {
  if (cycle_ >= spec_.lifetime) throw LifetimeExhausted("cycle = T");
  StepResult res;

  // Input arrives first: x may change at t only if cycle t-1 requested it.
  if (input_requested_ && env_input) {
    const Region& x = table_.at(RegionId::X);
    BitVec in = *env_input;
    in.resize(x.width(), 0);
    raw_write(x.lo, in, true);
  }
  input_requested_ = false;

  uint64_t ip = region_value(RegionId::Ip);
  uint32_t e_words = spec_.e_words;
  if (e_words == 0) e_words = 1;
  ip %= e_words;
  uint16_t instr = word(RegionId::P, static_cast<uint32_t>(ip));
  Opcode op = decode_opcode(instr);
  uint16_t operand = instr & 0x0fff;
  res.executed = op;

  uint64_t next_ip = (ip + 1) % e_words;
  uint16_t acc = static_cast<uint16_t>(region_value(RegionId::Acc));
  switch (op) {
    case Opcode::Nop: break;
    case Opcode::SetY:
      write_region_value(RegionId::Y, operand, Actor::Hardware);
      break;
    case Opcode::ReqIn:
      input_requested_ = true;
      res.requested_input = true;
      break;
    case Opcode::LoadA:
      write_region_value(RegionId::Acc, operand, Actor::Hardware);
      break;
    case Opcode::AddA:
      write_region_value(RegionId::Acc, static_cast<uint16_t>(acc + operand), Actor::Hardware);
      break;
    case Opcode::SubA:
      write_region_value(RegionId::Acc, static_cast<uint16_t>(acc - operand), Actor::Hardware);
      break;
    case Opcode::Jmp:
      next_ip = operand % e_words;
      break;
    case Opcode::Jnz:
      if (acc != 0) next_ip = operand % e_words;
      break;
    case Opcode::Djnz:
      acc = static_cast<uint16_t>(acc - 1);
      write_region_value(RegionId::Acc, acc, Actor::Hardware);
      if (acc != 0) next_ip = operand % e_words;
      break;
  }
  write_region_value(RegionId::Ip, next_ip, Actor::Hardware);

  ++cycle_;
  encode_time();
  raw_write(table_.at(RegionId::Parity).lo, BitVec{static_cast<uint8_t>(cycle_ & 1)}, true);
  maybe_snapshot();
  return res;
}

void Machine::advance_cycles(uint64_t n) {
  for (uint64_t i = 0; i < n; ++i) {
    if (cycle_ >= spec_.lifetime) throw LifetimeExhausted("cycle = T");
    ++cycle_;
    encode_time();
    raw_write(table_.at(RegionId::Parity).lo, BitVec{static_cast<uint8_t>(cycle_ & 1)}, true);
    maybe_snapshot();
  }
}

void Machine::set_switchbit() {
  if (switch_latch_used_) throw MachineError("switchbit latch already consumed");
  switch_latch_used_ = true;
  raw_write(table_.at(RegionId::SwitchBit).lo, BitVec{1}, true);
}

void Machine::clear_switchbit() {
  raw_write(table_.at(RegionId::SwitchBit).lo, BitVec{0}, true);
}

bool Machine::switchbit() const { return bits_[table_.at(RegionId::SwitchBit).lo - 1] != 0; }

uint64_t Machine::state_hash() const {
  uint64_t h = fnv1a(bits_.data(), bits_.size());
  h = fnv1a(&cycle_, sizeof(cycle_), h);
  uint8_t flags = static_cast<uint8_t>((input_requested_ ? 1 : 0) | (switch_latch_used_ ? 2 : 0));
  return fnv1a(&flags, 1, h);
}

// --- state image -----------------------------------------------------------
// Layout: magic "SPMS", u16 version, u16 word_size, u64 lifetime, u32 period,
// u32 e_words, u16 region count, regions (id u8, level u8, lo u32, hi u32),
// u64 cycle, u8 flags, u32 bit count, packed payload.

namespace {
template <typename T>
void put(std::vector<uint8_t>& out, T v) {
  for (size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
template <typename T>
T take(const std::vector<uint8_t>& in, size_t& at) {
  if (at + sizeof(T) > in.size()) throw MachineError("truncated state image");
  T v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(in[at + i]) << (8 * i);
  at += sizeof(T);
  return v;
}
}  // namespace

std::vector<uint8_t> Machine::save_image() const {
  std::vector<uint8_t> out;
  out.insert(out.end(), {'S', 'P', 'M', 'S'});
  put<uint16_t>(out, 1);
  put<uint16_t>(out, static_cast<uint16_t>(spec_.word_size));
  put<uint64_t>(out, spec_.lifetime);
  put<uint32_t>(out, spec_.snapshot_period);
  put<uint32_t>(out, spec_.e_words);
  put<uint16_t>(out, static_cast<uint16_t>(table_.ordered().size()));
  for (const auto& r : table_.ordered()) {
    out.push_back(static_cast<uint8_t>(r.id));
    out.push_back(static_cast<uint8_t>(r.level));
    put<uint32_t>(out, r.lo);
    put<uint32_t>(out, r.hi);
  }
  put<uint64_t>(out, cycle_);
  out.push_back(static_cast<uint8_t>((input_requested_ ? 1 : 0) | (switch_latch_used_ ? 2 : 0)));
  put<uint32_t>(out, static_cast<uint32_t>(bits_.size()));
  uint8_t cur = 0;
  int nb = 0;
  for (uint8_t b : bits_) {
    cur = static_cast<uint8_t>(cur | (b << nb));
    if (++nb == 8) {
      out.push_back(cur);
      cur = 0;
      nb = 0;
    }
  }
  if (nb) out.push_back(cur);
  return out;
}

Machine Machine::load_image(const std::vector<uint8_t>& image) {
  size_t at = 0;
  if (image.size() < 4 || image[0] != 'S' || image[1] != 'P' || image[2] != 'M' || image[3] != 'S')
    throw MachineError("bad state image magic");
  at = 4;
  uint16_t version = take<uint16_t>(image, at);
  if (version != 1) throw MachineError("unsupported state image version");
  HardwareSpec spec;
  spec.word_size = take<uint16_t>(image, at);
  spec.lifetime = take<uint64_t>(image, at);
  spec.snapshot_period = take<uint32_t>(image, at);
  spec.e_words = take<uint32_t>(image, at);
  uint16_t nregions = take<uint16_t>(image, at);
  std::vector<Region> regions;
  for (uint16_t i = 0; i < nregions; ++i) {
    Region r;
    r.id = static_cast<RegionId>(take<uint8_t>(image, at));
    r.level = static_cast<WriteLevel>(take<uint8_t>(image, at));
    r.lo = take<uint32_t>(image, at);
    r.hi = take<uint32_t>(image, at);
    regions.push_back(r);
  }
  uint64_t cycle = take<uint64_t>(image, at);
  uint8_t flags = take<uint8_t>(image, at);
  uint32_t nbits = take<uint32_t>(image, at);
  Machine m(RegionTable::custom(std::move(regions)), spec);
  if (m.bits_.size() != nbits) throw MachineError("state image bit count mismatch");
  for (uint32_t i = 0; i < nbits; ++i) {
    if (at + i / 8 >= image.size()) throw MachineError("truncated state image payload");
    m.bits_[i] = (image[at + i / 8] >> (i % 8)) & 1;
  }
  m.cycle_ = cycle;
  m.input_requested_ = flags & 1;
  m.switch_latch_used_ = flags & 2;
  m.journal_.clear();
  return m;
}

std::vector<uint16_t> assemble_policy(const std::vector<std::string>& lines) {
  std::vector<uint16_t> words;
  for (const auto& raw : lines) {
    std::string line = raw.substr(0, raw.find(';'));
    std::istringstream ss(line);
    std::string mn;
    if (!(ss >> mn)) continue;
    uint32_t arg = 0;
    ss >> arg;
    Opcode op;
    if (mn == "nop") op = Opcode::Nop;
    else if (mn == "sety") op = Opcode::SetY;
    else if (mn == "reqin") op = Opcode::ReqIn;
    else if (mn == "loada") op = Opcode::LoadA;
    else if (mn == "adda") op = Opcode::AddA;
    else if (mn == "suba") op = Opcode::SubA;
    else if (mn == "jmp") op = Opcode::Jmp;
    else if (mn == "jnz") op = Opcode::Jnz;
    else if (mn == "djnz") op = Opcode::Djnz;
    else throw MachineError("unknown mnemonic: " + mn);
    words.push_back(encode_instr(op, static_cast<uint16_t>(arg)));
  }
  return words;
}

}  // namespace selfproof
