#pragma once

// Small-step reduction of structurally recursive programs. One step bundles
// unfolding the definition, applying it to the argument and selecting the
// matching clause. Steps come in two granularities: a single leftmost
// outermost redex, or a whole "level" that rewrites every outermost pending
// call at once.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "structrec/expr.hpp"

namespace structrec {

// One pattern-match case: `constructor payload_vars... child_vars... => body`.
// Body Var nodes name child variables or extra parameters; List items that
// equal a payload variable name are replaced by the bound payload.
struct Clause {
  Token constructor;
  std::vector<std::string> payload_vars;
  std::vector<std::string> child_vars;
  Expr body;
  std::string rule_id;
};

// Matches on its first argument. Remaining arguments bind to extra_params.
class Program {
 public:
  // Throws DomainError unless clauses cover every constructor exactly once
  // and every self call is applied to a child variable.
  Program(std::string name, const InductiveDef& scrutinee, std::vector<std::string> extra_params,
          std::vector<Clause> clauses);

  const std::string& name() const { return name_; }
  const InductiveDef& scrutinee() const { return *scrutinee_; }
  std::size_t arity() const { return 1 + extra_params_.size(); }
  std::span<const Clause> clauses() const { return clauses_; }
  const std::vector<std::string>& extra_params() const { return extra_params_; }

  const Clause& clause_for(const Term& scrutinee) const;
  Expr instantiate(const Clause& clause, std::span<const Expr> args) const;

 private:
  std::string name_;
  const InductiveDef* scrutinee_;
  std::vector<std::string> extra_params_;
  std::vector<Clause> clauses_;
};

class ProgramSet {
 public:
  void add(Program p);
  const Program* find(std::string_view name) const;
  const Program& at(std::string_view name) const;

 private:
  std::map<std::string, Program, std::less<>> programs_;
};

// s, add, preorder, inorder.
const ProgramSet& builtin_programs();

// Parts of a traversal Branch clause, in output order.
enum class TraversalPart { Left, Value, Right };
// A traversal program whose Branch clause concatenates the parts in `order`.
// preorder = {Value, Left, Right}; inorder = {Left, Value, Right}.
Program traversal_program(std::string name, std::array<TraversalPart, 3> order);

// `program input` as an Expr.
Expr apply_program(std::string_view program, const Term& input);

struct ReductionStep {
  Expr before;
  std::vector<ExprPath> redexes;
  std::vector<std::string> rules;
  Expr after;
};

struct Trace {
  Expr initial;
  std::vector<ReductionStep> steps;

  const Expr& final_expr() const { return steps.empty() ? initial : steps.back().after; }
  std::size_t levels() const { return steps.size(); }
  // initial followed by every step's result.
  std::vector<Expr> states() const;
};

struct Reduction {
  Expr result;
  Trace trace;
};

struct KStepResult {
  Expr result;
  std::size_t levels_applied = 0;
  // Normal form was reached before k levels.
  bool normal_early = false;
};

struct NormalForm {
  Expr result;
  std::size_t levels = 0;
};

// Level budget that structural recursion never exceeds on builtin programs.
std::size_t default_fuel(const Expr& e);

class Reducer {
 public:
  explicit Reducer(const ProgramSet& programs = builtin_programs()) : programs_(&programs) {}

  // Rewrites the leftmost outermost redex: a call whose arguments are values,
  // or a concatenation of two literal lists. Empty when e is normal.
  // Throws StuckError for a non-normal expression without a redex.
  std::optional<ReductionStep> step_single(const Expr& e) const;

  // Rewrites every outermost call whose arguments are values, then flattens
  // pre-existing concatenations whose operands became literal lists.
  std::optional<ReductionStep> step_level(const Expr& e) const;

  // Iterates step_level to normal form. Throws FuelExhausted after `fuel` levels.
  Reduction reduce(const Expr& e, std::size_t fuel) const;
  Reduction reduce(const Expr& e) const { return reduce(e, default_fuel(e)); }

  // Same as reduce without keeping the trace.
  NormalForm normalize(const Expr& e, std::size_t fuel) const;
  NormalForm normalize(const Expr& e) const { return normalize(e, default_fuel(e)); }

  // Applies up to k levels; normal_early is set when fewer than k were possible.
  KStepResult reduce_k(const Expr& e, std::size_t k) const;

  // Levels `program input` needs to reach normal form.
  std::size_t recursion_depth(const Term& input, std::string_view program) const;

  const ProgramSet& programs() const { return *programs_; }

 private:
  std::optional<Expr> advance(const Expr& e) const;

  const ProgramSet* programs_;
};

}  // namespace structrec
