#pragma once

// Non-recursive successor procedures recovered from trained sequence
// models, written as ASM machines. Neither looks at the recursion: the
// natural-order one compares the output position with a precomputed
// boundary, the reverse-order one only tracks whether its X1 was emitted.
// Faithful mode keeps the models' blind spot on all-ones inputs, where
// both emit one token too few.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "structrec/asm.hpp"
#include "structrec/seqdiff.hpp"

namespace structrec {

enum class ShortcutOrder { natural, reverse };
enum class ShortcutMode { faithful, corrected };

struct ShortcutKind {
  ShortcutOrder order = ShortcutOrder::natural;
  ShortcutMode mode = ShortcutMode::faithful;
};

std::string_view to_string(ShortcutOrder order);
std::string_view to_string(ShortcutMode mode);
ShortcutOrder parse_shortcut_order(std::string_view text);
ShortcutMode parse_shortcut_mode(std::string_view text);

// Location names each machine's guards are allowed to read.
inline constexpr std::array<std::string_view, 4> kNaturalGuardReads{"pos", "boundary", "halt",
                                                                    "done"};
inline constexpr std::array<std::string_view, 5> kReverseGuardReads{"pos", "pivot", "switched",
                                                                    "halt", "done"};

// init computes boundary = index of the final X0 and halt = output length.
// Rules: copy, pivot, lead, fill, halt.
const AsmMachine& natural_shortcut(ShortcutMode mode);
// init computes pivot = index of the first X0 and halt = output length.
// Rules: flip, switch, close, copy, halt.
const AsmMachine& reverse_shortcut(ShortcutMode mode);
const AsmMachine& shortcut_machine(ShortcutKind kind);

// Inputs and outputs in the emulator's own order. Throw ParseError on
// malformed input.
Tokens emulate_natural(std::span<const Token> tokens, ShortcutMode mode = ShortcutMode::faithful);
Tokens emulate_reverse(std::span<const Token> tokens, ShortcutMode mode = ShortcutMode::faithful);
Tokens emulate(ShortcutKind kind, std::span<const Token> tokens);
AsmRun emulate_run(ShortcutKind kind, std::span<const Token> tokens, bool keep_log = false);

struct EdgeMember {
  std::size_t bits = 0;
  std::uint64_t value = 0;
};

struct EdgeCaseGroup {
  int id = 0;
  std::vector<EdgeMember> members;
};

// Group 1: all-ones, X1^(L-1) 01, value 2^L - 1, for L >= 2.
// Group 2: X1^(L-2) X0 01, value 3 * 2^(L-2) - 1, for L >= 3.
// Throws DomainError when lo > hi, hi > 64, or both groups come out empty.
std::array<EdgeCaseGroup, 2> edge_inputs(std::size_t lo_bits, std::size_t hi_bits);

// 1, 2, or 0 for values in neither group.
int edge_group(std::uint64_t n);

// Successor sequence computed by the reduction engine, in `order`.
Tokens successor_oracle(std::uint64_t n, SeqOrder order);
Tokens encode_in_order(std::uint64_t n, SeqOrder order);

struct DiffCase {
  std::uint64_t value = 0;
  int edge_group = 0;
  Tokens input;
  Tokens expected;
  Tokens got;
  FailureSignature signature = FailureSignature::other;
};

struct DiffReport {
  ShortcutKind kind;
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  std::uint64_t checked = 0;
  std::vector<DiffCase> cases;

  std::size_t count(FailureSignature sig) const;
};

// Every value in lo..hi where the emulator disagrees with the oracle.
DiffReport diff_against_oracle(ShortcutKind kind, std::uint64_t lo, std::uint64_t hi);

std::string render_diff_text(const DiffReport& report);
// One JSON object per disagreement.
std::string render_diff_jsonl(const DiffReport& report);

}  // namespace structrec
