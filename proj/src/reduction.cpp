#include "structrec/reduction.hpp"

#include <algorithm>
#include <set>

namespace structrec {

namespace {

bool mentions_only_child_self_calls(const Expr& body, const std::string& self,
                                    const std::vector<std::string>& child_vars) {
  if (body.kind() == Expr::Kind::Call && body.name() == self) {
    if (body.children().empty()) return false;
    const Expr& first = body.child(0);
    if (first.kind() != Expr::Kind::Var ||
        std::find(child_vars.begin(), child_vars.end(), first.name()) == child_vars.end()) {
      return false;
    }
  }
  return std::all_of(body.children().begin(), body.children().end(), [&](const Expr& c) {
    return mentions_only_child_self_calls(c, self, child_vars);
  });
}

}  // namespace

Program::Program(std::string name, const InductiveDef& scrutinee,
                 std::vector<std::string> extra_params, std::vector<Clause> clauses)
    : name_(std::move(name)),
      scrutinee_(&scrutinee),
      extra_params_(std::move(extra_params)),
      clauses_(std::move(clauses)) {
  std::set<std::string> covered;
  for (auto& c : clauses_) {
    const ConstructorDef& ctor = scrutinee.at(c.constructor);
    c.constructor = ctor.name;
    if (!covered.insert(ctor.name).second) {
      throw DomainError(name_ + ": constructor " + ctor.name + " matched twice");
    }
    if (c.child_vars.size() != ctor.recursive_arity ||
        c.payload_vars.size() != ctor.payload_kinds.size()) {
      throw DomainError(name_ + ": pattern for " + ctor.name + " has wrong arity");
    }
    if (!mentions_only_child_self_calls(c.body, name_, c.child_vars)) {
      throw DomainError(name_ + ": clause " + ctor.name +
                        " recurses on something other than a direct subterm");
    }
    if (c.rule_id.empty()) c.rule_id = name_ + "." + ctor.name;
  }
  if (covered.size() != scrutinee.constructors().size()) {
    throw DomainError(name_ + ": clauses do not cover every constructor of " + scrutinee.name());
  }
}

const Clause& Program::clause_for(const Term& scrutinee) const {
  for (const auto& c : clauses_) {
    if (c.constructor == scrutinee.constructor()) return c;
  }
  throw DomainError(name_ + ": no clause for " + scrutinee.constructor());
}

namespace {

struct Bindings {
  const std::vector<std::string>* payload_vars;
  std::span<const Token> payloads;
  const std::vector<std::string>* child_vars;
  const Term* scrutinee;
  const std::vector<std::string>* extra_params;
  std::span<const Expr> args;
};

Tokens substitute_tokens(std::span<const Token> items, const Bindings& b) {
  Tokens out;
  out.reserve(items.size());
  for (const auto& t : items) {
    auto it = std::find(b.payload_vars->begin(), b.payload_vars->end(), t);
    out.push_back(it == b.payload_vars->end() ? t
                                              : b.payloads[it - b.payload_vars->begin()]);
  }
  return out;
}

Expr substitute(const Expr& e, const Bindings& b) {
  switch (e.kind()) {
    case Expr::Kind::Value: return e;
    case Expr::Kind::Var: {
      const auto& cv = *b.child_vars;
      if (auto it = std::find(cv.begin(), cv.end(), e.name()); it != cv.end()) {
        return Expr::value(b.scrutinee->child(it - cv.begin()));
      }
      const auto& ep = *b.extra_params;
      if (auto it = std::find(ep.begin(), ep.end(), e.name()); it != ep.end()) {
        return b.args[1 + (it - ep.begin())];
      }
      throw DomainError("unbound template variable " + e.name());
    }
    case Expr::Kind::List: return Expr::list(substitute_tokens(e.tokens(), b));
    case Expr::Kind::Ctor: {
      ExprList kids;
      for (const auto& c : e.children()) kids.push_back(substitute(c, b));
      return Expr::ctor(e.ctor_type(), e.name(), substitute_tokens(e.tokens(), b), std::move(kids));
    }
    case Expr::Kind::Call: {
      ExprList kids;
      for (const auto& c : e.children()) kids.push_back(substitute(c, b));
      return Expr::call(e.name(), std::move(kids));
    }
    case Expr::Kind::Concat:
      return Expr::concat(substitute(e.child(0), b), substitute(e.child(1), b));
  }
  throw DomainError("unreachable expression kind");
}

}  // namespace

Expr Program::instantiate(const Clause& clause, std::span<const Expr> args) const {
  if (args.size() != arity()) {
    throw DomainError(name_ + " expects " + std::to_string(arity()) + " arguments");
  }
  const Term& scrutinee = args[0].term();
  Bindings b{&clause.payload_vars, scrutinee.payloads(), &clause.child_vars, &scrutinee,
             &extra_params_, args};
  return substitute(clause.body, b);
}

void ProgramSet::add(Program p) {
  std::string key = p.name();
  programs_.insert_or_assign(std::move(key), std::move(p));
}

const Program* ProgramSet::find(std::string_view name) const {
  auto it = programs_.find(name);
  return it == programs_.end() ? nullptr : &it->second;
}

const Program& ProgramSet::at(std::string_view name) const {
  if (const auto* p = find(name)) return *p;
  throw DomainError("unknown program '" + std::string(name) + "'");
}

Program traversal_program(std::string name, std::array<TraversalPart, 3> order) {
  auto part = [&](TraversalPart p) {
    switch (p) {
      case TraversalPart::Left: return Expr::call(name, {Expr::var("l")});
      case TraversalPart::Value: return Expr::list({"v"});
      case TraversalPart::Right: return Expr::call(name, {Expr::var("r")});
    }
    throw DomainError("bad traversal part");
  };
  Expr body = Expr::concat(part(order[0]), Expr::concat(part(order[1]), part(order[2])));
  const auto& tree = char_tree_def();
  std::vector<Clause> clauses;
  clauses.push_back({"Leaf", {}, {}, Expr::list({}), name + ".Leaf"});
  clauses.push_back({"Branch", {"v"}, {"l", "r"}, std::move(body), name + ".Branch"});
  return Program(name, tree, {}, std::move(clauses));
}

const ProgramSet& builtin_programs() {
  static const ProgramSet set = [] {
    ProgramSet ps;
    const auto& bin = bin_pos_def();
    const auto& nat = peano_def();
    // s 01 = X0 01 ; s (X0 b) = X1 b ; s (X1 b) = X0 (s b)
    ps.add(Program("s", bin, {},
                   {{"01", {}, {}, Expr::value(Term(bin, "X0", {}, {Term(bin, "01")})), "s.01"},
                    {"X0", {}, {"b"}, Expr::ctor(bin, "X1", {}, {Expr::var("b")}), "s.X0"},
                    {"X1", {}, {"b"},
                     Expr::ctor(bin, "X0", {}, {Expr::call("s", {Expr::var("b")})}), "s.X1"}}));
    // add I m = S m ; add (S p) m = S (add p m)
    ps.add(Program("add", nat, {"m"},
                   {{"I", {}, {}, Expr::ctor(nat, "S", {}, {Expr::var("m")}), "add.I"},
                    {"S", {}, {"p"},
                     Expr::ctor(nat, "S", {}, {Expr::call("add", {Expr::var("p"), Expr::var("m")})}),
                     "add.S"}}));
    using P = TraversalPart;
    ps.add(traversal_program("preorder", {P::Value, P::Left, P::Right}));
    ps.add(traversal_program("inorder", {P::Left, P::Value, P::Right}));
    return ps;
  }();
  return set;
}

Expr apply_program(std::string_view program, const Term& input) {
  return Expr::call(std::string(program), {Expr::value(input)});
}

std::vector<Expr> Trace::states() const {
  std::vector<Expr> out;
  out.reserve(steps.size() + 1);
  out.push_back(initial);
  for (const auto& s : steps) out.push_back(s.after);
  return out;
}

std::size_t default_fuel(const Expr& e) { return std::max<std::size_t>(1, 2 * e.token_count()); }

namespace {

struct Contracted {
  Expr result;
  const std::string* rule;
};

const std::string kConcatRule = "++";

bool args_are_values(const Expr& call) {
  return std::all_of(call.children().begin(), call.children().end(),
                     [](const Expr& a) { return a.is_value(); });
}

Expr list_append(const Expr& l, const Expr& r) {
  Tokens items(l.tokens().begin(), l.tokens().end());
  items.insert(items.end(), r.tokens().begin(), r.tokens().end());
  return Expr::list(std::move(items));
}

Expr rebuild(const Expr& e, ExprList kids) {
  switch (e.kind()) {
    case Expr::Kind::Ctor:
      return Expr::ctor(e.ctor_type(), e.name(), Tokens(e.tokens().begin(), e.tokens().end()),
                        std::move(kids));
    case Expr::Kind::Call: return Expr::call(e.name(), std::move(kids));
    case Expr::Kind::Concat: return Expr::concat(std::move(kids[0]), std::move(kids[1]));
    default: return e;
  }
}

std::optional<Contracted> contract(const ProgramSet& programs, const Expr& e) {
  if (e.kind() == Expr::Kind::Call && args_are_values(e)) {
    const Program& p = programs.at(e.name());
    const Term& scrutinee = e.child(0).term();
    if (&scrutinee.type() != &p.scrutinee()) {
      throw DomainError(p.name() + " applied to a " + scrutinee.type().name());
    }
    const Clause& c = p.clause_for(scrutinee);
    return Contracted{p.instantiate(c, e.children()), &c.rule_id};
  }
  if (e.kind() == Expr::Kind::Concat && e.child(0).is_list() && e.child(1).is_list()) {
    return Contracted{list_append(e.child(0), e.child(1)), &kConcatRule};
  }
  return std::nullopt;
}

std::optional<Expr> single(const ProgramSet& programs, const Expr& e, ExprPath& path,
                           const std::string*& rule) {
  if (auto c = contract(programs, e)) {
    rule = c->rule;
    return std::move(c->result);
  }
  switch (e.kind()) {
    case Expr::Kind::Value:
    case Expr::Kind::List: return std::nullopt;
    case Expr::Kind::Var: throw StuckError("free variable " + e.name() + " in expression");
    default: break;
  }
  for (std::uint32_t i = 0; i < e.children().size(); ++i) {
    path.push_back(i);
    if (auto inner = single(programs, e.child(i), path, rule)) {
      ExprList kids(e.children().begin(), e.children().end());
      kids[i] = std::move(*inner);
      return rebuild(e, std::move(kids));
    }
    path.pop_back();
  }
  throw StuckError("no redex in non-normal expression: " + e.to_string());
}

struct LevelLog {
  // Paths and rule ids are only collected when recording.
  bool record = true;
  std::size_t count = 0;
  ExprPath path;
  std::vector<ExprPath> redexes;
  std::vector<std::string> rules;

  void note(const std::string& rule) {
    ++count;
    if (record) {
      redexes.push_back(path);
      rules.push_back(rule);
    }
  }
};

Expr level(const ProgramSet& programs, const Expr& e, LevelLog& log) {
  switch (e.kind()) {
    case Expr::Kind::Value:
    case Expr::Kind::List: return e;
    case Expr::Kind::Var: throw StuckError("free variable " + e.name() + " in expression");
    case Expr::Kind::Call:
      if (args_are_values(e)) {
        auto c = contract(programs, e);
        log.note(*c->rule);
        return std::move(c->result);
      }
      break;
    default: break;
  }
  const std::size_t before = log.count;
  ExprList kids;
  for (std::uint32_t i = 0; i < e.children().size(); ++i) {
    if (log.record) log.path.push_back(i);
    kids.push_back(level(programs, e.child(i), log));
    if (log.record) log.path.pop_back();
  }
  if (e.kind() == Expr::Kind::Concat && kids[0].is_list() && kids[1].is_list()) {
    log.note(kConcatRule);
    return list_append(kids[0], kids[1]);
  }
  return log.count != before ? rebuild(e, std::move(kids)) : e;
}

}  // namespace

std::optional<ReductionStep> Reducer::step_single(const Expr& e) const {
  if (e.is_normal()) return std::nullopt;
  ExprPath path;
  const std::string* rule = nullptr;
  auto after = single(*programs_, e, path, rule);
  if (!after) throw StuckError("no redex in non-normal expression: " + e.to_string());
  return ReductionStep{e, {std::move(path)}, {*rule}, std::move(*after)};
}

std::optional<ReductionStep> Reducer::step_level(const Expr& e) const {
  if (e.is_normal()) return std::nullopt;
  LevelLog log;
  Expr after = level(*programs_, e, log);
  if (log.count == 0) throw StuckError("no redex in non-normal expression: " + e.to_string());
  return ReductionStep{e, std::move(log.redexes), std::move(log.rules), std::move(after)};
}

Reduction Reducer::reduce(const Expr& e, std::size_t fuel) const {
  if (fuel == 0) throw DomainError("fuel must be at least 1");
  Reduction out{e, Trace{e, {}}};
  while (auto step = step_level(out.result)) {
    if (out.trace.steps.size() == fuel) {
      throw FuelExhausted("no normal form within " + std::to_string(fuel) + " levels");
    }
    out.result = step->after;
    out.trace.steps.push_back(std::move(*step));
  }
  return out;
}

std::optional<Expr> Reducer::advance(const Expr& e) const {
  if (e.is_normal()) return std::nullopt;
  LevelLog log;
  log.record = false;
  Expr after = level(*programs_, e, log);
  if (log.count == 0) throw StuckError("no redex in non-normal expression: " + e.to_string());
  return after;
}

KStepResult Reducer::reduce_k(const Expr& e, std::size_t k) const {
  KStepResult out{e, 0, false};
  while (out.levels_applied < k) {
    auto next = advance(out.result);
    if (!next) {
      out.normal_early = true;
      break;
    }
    out.result = std::move(*next);
    ++out.levels_applied;
  }
  return out;
}

NormalForm Reducer::normalize(const Expr& e, std::size_t fuel) const {
  if (fuel == 0) throw DomainError("fuel must be at least 1");
  NormalForm out{e, 0};
  while (auto next = advance(out.result)) {
    if (out.levels == fuel) {
      throw FuelExhausted("no normal form within " + std::to_string(fuel) + " levels");
    }
    out.result = std::move(*next);
    ++out.levels;
  }
  return out;
}

std::size_t Reducer::recursion_depth(const Term& input, std::string_view program) const {
  return normalize(apply_program(program, input)).levels;
}

}  // namespace structrec
