// Copyright 2026 the selfproof authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "selfproof/bits.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace selfproof {

// ---------------------------------------------------------------------------
// Regions
// ---------------------------------------------------------------------------

enum class RegionId : uint8_t {
  Time,        // binary cycle counter, hardware-incremented
  Ip,          // instruction pointer (fast variable)
  Parity,      // cycle parity flag (fast variable)
  SwitchBit,   // write-once commit bit, set only by check()
  Acc,         // policy accumulator register
  SnapBuf,     // hardware snapshot of the fast variables, refreshed every c cycles
  X,           // environment input
  Y,           // output / action signal
  P,           // program: policy e + searcher settings
  Sp,          // technique scratch
  Proof,       // serialized proof
  SwitchProg,  // candidate self-rewrite
};

constexpr int kRegionCount = 12;

const char* region_name(RegionId id);
std::optional<RegionId> region_from_name(std::string_view name);

// Who may write a region. Hardware may always write; switchprog may write
// SwitchprogWritable and TechniqueWritable; techniques only TechniqueWritable.
enum class WriteLevel : uint8_t { HardwareOnly, SwitchprogWritable, TechniqueWritable };

enum class Actor : uint8_t { Hardware, Switchprog, Technique };

struct Region {
  RegionId id;
  uint32_t lo = 0;  // 1-based, inclusive
  uint32_t hi = 0;
  WriteLevel level = WriteLevel::HardwareOnly;

  uint32_t width() const { return hi - lo + 1; }
};

// Fixed at machine construction; spans never overlap.
class RegionTable {
 public:
  RegionTable() = default;

  // Builds the default layout. Region sizes in bits; order is fixed.
  struct Sizes {
    uint32_t time = 64;
    uint32_t x = 32;
    uint32_t y = 16;
    uint32_t p_words = 32;
    uint32_t sp_words = 32;
    uint32_t proof = 2576;
    uint32_t switchprog_words = 20;
  };
  static RegionTable standard(const Sizes& sizes, uint32_t word_size);

  // Arbitrary layout (used by fixtures); validates non-overlap and coverage
  // of all twelve region ids.
  static RegionTable custom(std::vector<Region> regions);

  const Region& at(RegionId id) const { return regions_[static_cast<size_t>(id)]; }
  const std::vector<Region>& ordered() const { return ordered_; }
  uint32_t total_bits() const { return total_bits_; }

  // Region containing the absolute bit index, if any.
  std::optional<RegionId> region_of(uint32_t abs_bit) const;

 private:
  std::array<Region, kRegionCount> regions_{};
  std::vector<Region> ordered_;
  uint32_t total_bits_ = 0;
};

// ---------------------------------------------------------------------------
// Hardware
// ---------------------------------------------------------------------------

// Policy instruction set. Opcode = high 4 bits of a word, operand = low 12.
// The table is total: opcodes 9..15 decode to Nop.
enum class Opcode : uint8_t {
  Nop = 0,
  SetY = 1,    // y := operand
  ReqIn = 2,   // request environment input for the next cycle
  LoadA = 3,   // acc := operand
  AddA = 4,    // acc += operand (mod 2^16)
  SubA = 5,    // acc -= operand (mod 2^16)
  Jmp = 6,     // ip := operand (word index within e)
  Jnz = 7,     // if acc != 0: ip := operand
  Djnz = 8,    // acc -= 1; if acc != 0: ip := operand
};

Opcode decode_opcode(uint16_t word);
uint16_t encode_instr(Opcode op, uint16_t operand);

struct HardwareSpec {
  uint32_t word_size = 16;
  uint64_t lifetime = 2048;      // T
  uint32_t snapshot_period = 8;  // c
  // e occupies p words [0, e_words); the remaining p words hold searcher
  // settings, rewritable by switchprog.
  uint32_t e_words = 8;
};

// Searcher settings live in the tail words of p so a switchprog can rewrite
// them. Word indices are relative to the settings area.
enum SettingsWord : uint32_t {
  kSettingMode = 0,             // 0 strict, 1 relaxed
  kSettingEBlockCycles = 1,     // cycles given to e per life-loop iteration
  kSettingSearchBlockSteps = 2, // technique steps per searcher block
  kSettingUnfoldHeadroom = 3,   // cycles added to `now` when unfold pins t1
};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct MachineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IllegalWrite : MachineError {
  using MachineError::MachineError;
};
struct OutOfRange : MachineError {
  using MachineError::MachineError;
};
struct LifetimeExhausted : MachineError {
  using MachineError::MachineError;
};

// ---------------------------------------------------------------------------
// Machine
// ---------------------------------------------------------------------------

struct JournalEntry {
  uint32_t lo;  // absolute 1-based bit index
  BitVec old_bits;
};

// Journal mark: rewinding to a mark restores the machine bit-exactly,
// including the cycle (the time region is re-encoded from it).
struct JournalMark {
  size_t journal_len = 0;
  uint64_t cycle = 0;
  bool input_requested = false;
};

class Machine {
 public:
  Machine(RegionTable table, HardwareSpec spec);

  const RegionTable& regions() const { return table_; }
  const HardwareSpec& spec() const { return spec_; }
  uint64_t cycle() const { return cycle_; }
  uint64_t lifetime() const { return spec_.lifetime; }
  bool input_requested() const { return input_requested_; }

  // --- reads -------------------------------------------------------------
  // Pure region read over absolute bit indices clipped to the region span.
  BitVec read_region(RegionId id, uint32_t lo, uint32_t hi) const;
  BitVec read_region(RegionId id) const;
  // Raw read over absolute indices, any span.
  BitVec read_abs(uint32_t lo, uint32_t hi) const;

  uint64_t region_value(RegionId id) const;  // big-endian decode
  std::string time_string() const { return u64_to_minimal_binary(cycle_); }

  // --- writes ------------------------------------------------------------
  // Absolute-indexed write under access control; every write is journaled.
  void write_abs(uint32_t lo, const BitVec& bits, Actor actor);
  void write_region(RegionId id, uint32_t lo, uint32_t hi, const BitVec& bits, Actor actor);
  void write_region_value(RegionId id, uint64_t value, Actor actor);

  size_t journal_size() const { return journal_.size(); }

  // --- journal marks -----------------------------------------------------
  JournalMark mark() const { return {journal_.size(), cycle_, input_requested_}; }
  // Replays journal entries backwards down to the mark and rewinds the cycle.
  void rewind_to(const JournalMark& m);
  // Drops journal entries older than the mark (storage reclaim between runs).
  void forget_before(const JournalMark& m);

  // --- hardware ----------------------------------------------------------
  // Executes one policy instruction; advances the cycle; re-encodes time,
  // parity and (every c cycles) the snapshot buffer. `env_input` is applied
  // to x only if the previous cycle executed ReqIn.
  struct StepResult {
    Opcode executed = Opcode::Nop;
    bool requested_input = false;
  };
  StepResult step(const std::optional<BitVec>& env_input);

  // Advances the clock by n cycles without executing instructions (idle /
  // busy-wait / metered charges). Snapshots still fire.
  void advance_cycles(uint64_t n);

  // switchbit plumbing; only the switch executor calls these.
  void set_switchbit();
  void clear_switchbit();
  bool switchbit() const;
  bool switch_latch_used() const { return switch_latch_used_; }

  uint64_t state_hash() const;

  // The word (16 bits) at word index `w` of region `id` (0-based words).
  uint16_t word(RegionId id, uint32_t w) const;
  void set_word(RegionId id, uint32_t w, uint16_t value, Actor actor);

  // Searcher settings accessors (tail words of p).
  uint16_t setting(uint32_t idx) const;
  void poke_setting(uint32_t idx, uint16_t value);  // hardware-level, for loaders

  // --- state image I/O ----------------------------------------------------
  std::vector<uint8_t> save_image() const;
  static Machine load_image(const std::vector<uint8_t>& image);

 private:
  void encode_time();
  void maybe_snapshot();
  void raw_write(uint32_t lo, const BitVec& bits, bool journal);
  void check_writable(uint32_t lo, uint32_t hi, Actor actor) const;

  RegionTable table_;
  HardwareSpec spec_;
  BitVec bits_;
  uint64_t cycle_ = 1;
  bool input_requested_ = false;
  bool switch_latch_used_ = false;
  std::vector<JournalEntry> journal_;
};

// Assembles policy source ("sety 1", "jmp 0", ...) into instruction words.
std::vector<uint16_t> assemble_policy(const std::vector<std::string>& lines);

}  // namespace selfproof
