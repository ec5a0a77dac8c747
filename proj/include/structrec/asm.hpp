#pragma once

// Abstract State Machines: a finite set of guarded update rules fired
// simultaneously over a location store, plus a recursive variant where a
// rule may spawn a child agent and wait for its result.

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "structrec/term.hpp"

namespace structrec {

// monostate is undef.
using AsmValue = std::variant<std::monostate, Token, std::uint64_t, bool>;

inline bool is_undef(const AsmValue& v) { return std::holds_alternative<std::monostate>(v); }
// Typed reads. Throw DomainError on a type mismatch (undef included).
const Token& as_token(const AsmValue& v);
std::uint64_t as_nat(const AsmValue& v);
bool as_bool(const AsmValue& v);
// undef reads as false.
bool truthy(const AsmValue& v);
std::string to_string(const AsmValue& v);

struct Location {
  std::string name;
  std::optional<std::uint64_t> index;

  Location(std::string n) : name(std::move(n)) {}  // NOLINT(google-explicit-constructor)
  Location(const char* n) : name(n) {}             // NOLINT(google-explicit-constructor)
  Location(std::string n, std::uint64_t i) : name(std::move(n)), index(i) {}

  friend auto operator<=>(const Location&, const Location&) = default;
  friend bool operator==(const Location&, const Location&) = default;
};

std::string to_string(const Location& loc);

class AsmState {
 public:
  const AsmValue& get(const Location& loc) const;
  // Writing undef erases the location.
  void set(const Location& loc, AsmValue value);
  const std::map<Location, AsmValue>& store() const { return store_; }

  friend bool operator==(const AsmState&, const AsmState&) = default;

 private:
  std::map<Location, AsmValue> store_;
};

// Guard access to the state, limited to the rule's declared read set.
class StateView {
 public:
  StateView(const AsmState& state, std::span<const std::string> reads, std::string_view rule)
      : state_(&state), reads_(reads), rule_(rule) {}
  // Throws DomainError when loc.name is outside the read set.
  const AsmValue& get(const Location& loc) const;

 private:
  const AsmState* state_;
  std::span<const std::string> reads_;
  std::string_view rule_;
};

struct Update {
  Location loc;
  AsmValue value;
};
using UpdateSet = std::vector<Update>;

struct GuardedRule {
  std::string id;
  // Location names the guard may read.
  std::vector<std::string> reads;
  std::function<bool(const StateView&)> guard;
  // Evaluated against the pre-step state; may read anything.
  std::function<UpdateSet(const AsmState&)> updates;
};

struct AsmMachine {
  std::string name;
  std::vector<GuardedRule> rules;
  std::function<AsmState(std::span<const Token>)> init;
  std::function<bool(const AsmState&)> halted;
  std::function<Tokens(const AsmState&)> output;
};

struct AsmStepResult {
  AsmState state;
  std::vector<std::string> fired;
  UpdateSet updates;
};

// Fires every rule whose guard holds and applies all updates at once.
// Throws UpdateClash when two updates write different values to one location.
AsmStepResult asm_step(const AsmMachine& m, const AsmState& s);

struct AsmLogEntry {
  std::size_t step = 0;
  std::vector<std::string> fired;
  UpdateSet updates;
};

struct AsmRun {
  AsmState state;
  std::size_t steps = 0;
  Tokens output;
  std::size_t max_fired = 0;
  std::vector<AsmLogEntry> log;
};

// Steps until halted. Throws BudgetExhausted after `budget` steps,
// DomainError when budget is 0.
AsmRun asm_run(const AsmMachine& m, std::span<const Token> input, std::size_t budget,
               bool keep_log = false);

// One line per step: "3 [s.X1] emit := X0; pos := 2".
std::string render_log(const AsmRun& run);

// Spawns a child agent while `guard` holds. The child runs the same
// machine on `argument(state)`; its output is written to
// result_name(i) and result_name_len in the caller.
struct RasmCall {
  std::string id;
  std::vector<std::string> reads;
  std::function<bool(const StateView&)> guard;
  std::function<Tokens(const AsmState&)> argument;
  std::string result_name = "result";
};

struct RasmSpec {
  AsmMachine machine;
  // Enabled calls spawn children left to right; each child finishes
  // before the next starts.
  std::vector<RasmCall> calls;
};

struct RasmRun {
  Tokens output;
  std::size_t child_agents = 0;
  std::size_t max_depth = 0;
  // Rule steps summed over all agents.
  std::size_t steps = 0;
};

// `budget` bounds the steps of each agent separately.
RasmRun rasm_run(const RasmSpec& spec, std::span<const Token> input, std::size_t budget);

// Successor on constructor-order bin_pos tokens. Rules s.01, s.X0, s.X1
// select the clause, `clock` writes the emitted token and advances, and
// `copy` transfers the untouched suffix.
const AsmMachine& successor_asm();

// Successor where the X1 clause spawns a child agent on the tail.
const RasmSpec& successor_rasm();

}  // namespace structrec
