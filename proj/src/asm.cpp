#include "structrec/asm.hpp"

#include <algorithm>

namespace structrec {

const Token& as_token(const AsmValue& v) {
  if (const auto* t = std::get_if<Token>(&v)) return *t;
  throw DomainError("expected a token, got " + to_string(v));
}

std::uint64_t as_nat(const AsmValue& v) {
  if (const auto* n = std::get_if<std::uint64_t>(&v)) return *n;
  throw DomainError("expected a natural, got " + to_string(v));
}

bool as_bool(const AsmValue& v) {
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  throw DomainError("expected a boolean, got " + to_string(v));
}

bool truthy(const AsmValue& v) {
  const auto* b = std::get_if<bool>(&v);
  return b != nullptr && *b;
}

std::string to_string(const AsmValue& v) {
  struct {
    std::string operator()(std::monostate) const { return "undef"; }
    std::string operator()(const Token& t) const { return t; }
    std::string operator()(std::uint64_t n) const { return std::to_string(n); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
  } visit;
  return std::visit(visit, v);
}

std::string to_string(const Location& loc) {
  return loc.index ? loc.name + "(" + std::to_string(*loc.index) + ")" : loc.name;
}

const AsmValue& AsmState::get(const Location& loc) const {
  static const AsmValue undef;
  auto it = store_.find(loc);
  return it == store_.end() ? undef : it->second;
}

void AsmState::set(const Location& loc, AsmValue value) {
  if (is_undef(value)) {
    store_.erase(loc);
  } else {
    store_.insert_or_assign(loc, std::move(value));
  }
}

const AsmValue& StateView::get(const Location& loc) const {
  if (std::find(reads_.begin(), reads_.end(), loc.name) == reads_.end()) {
    throw DomainError("guard of " + std::string(rule_) + " reads undeclared location " +
                      to_string(loc));
  }
  return state_->get(loc);
}

namespace {

struct Fired {
  std::vector<std::string> ids;
  UpdateSet updates;
};

// Updates come back sorted by location, so the result does not depend on
// rule order.
Fired collect(const AsmMachine& m, const AsmState& s) {
  Fired out;
  std::vector<std::pair<UpdateSet, const std::string*>> sets;
  for (const auto& rule : m.rules) {
    if (!rule.guard(StateView(s, rule.reads, rule.id))) continue;
    out.ids.push_back(rule.id);
    sets.emplace_back(rule.updates(s), &rule.id);
  }
  std::map<Location, std::pair<AsmValue*, const std::string*>> seen;
  for (auto& [set, id] : sets) {
    for (auto& u : set) {
      auto [it, fresh] = seen.try_emplace(u.loc, &u.value, id);
      if (!fresh && *it->second.first != u.value) {
        throw UpdateClash("rules " + *it->second.second + " and " + *id + " write " +
                          to_string(u.loc) + " := " + to_string(*it->second.first) + " and " +
                          to_string(u.value));
      }
    }
  }
  out.updates.reserve(seen.size());
  for (auto& [loc, v] : seen) out.updates.push_back({loc, std::move(*v.first)});
  return out;
}

}  // namespace

AsmStepResult asm_step(const AsmMachine& m, const AsmState& s) {
  Fired f = collect(m, s);
  AsmStepResult out{s, std::move(f.ids), std::move(f.updates)};
  for (const auto& u : out.updates) out.state.set(u.loc, u.value);
  return out;
}

AsmRun asm_run(const AsmMachine& m, std::span<const Token> input, std::size_t budget,
               bool keep_log) {
  if (budget == 0) throw DomainError("budget must be at least 1");
  AsmRun run{m.init(input), 0, {}, 0, {}};
  while (!m.halted(run.state)) {
    if (run.steps == budget) {
      throw BudgetExhausted(m.name + " did not halt within " + std::to_string(budget) + " steps");
    }
    Fired f = collect(m, run.state);
    if (f.ids.empty()) throw StuckError(m.name + ": no rule enabled in a non-halted state");
    for (const auto& u : f.updates) run.state.set(u.loc, u.value);
    ++run.steps;
    run.max_fired = std::max(run.max_fired, f.ids.size());
    if (keep_log) run.log.push_back({run.steps, std::move(f.ids), std::move(f.updates)});
  }
  run.output = m.output(run.state);
  return run;
}

std::string render_log(const AsmRun& run) {
  std::string out;
  for (const auto& e : run.log) {
    out += std::to_string(e.step) + " [";
    for (std::size_t i = 0; i < e.fired.size(); ++i) out += (i ? "," : "") + e.fired[i];
    out += "]";
    for (std::size_t i = 0; i < e.updates.size(); ++i) {
      out += (i ? "; " : " ") + to_string(e.updates[i].loc) + " := " + to_string(e.updates[i].value);
    }
    out += "\n";
  }
  return out;
}

namespace {

struct AgentStats {
  std::size_t children = 0;
  std::size_t max_depth = 0;
  std::size_t steps = 0;
};

Tokens run_agent(const RasmSpec& spec, std::span<const Token> input, std::size_t budget,
                 std::size_t depth, AgentStats& stats) {
  const AsmMachine& m = spec.machine;
  stats.max_depth = std::max(stats.max_depth, depth);
  AsmState state = m.init(input);
  std::size_t steps = 0;
  while (!m.halted(state)) {
    if (steps == budget) {
      throw BudgetExhausted(m.name + " agent at depth " + std::to_string(depth) +
                            " did not halt within " + std::to_string(budget) + " steps");
    }
    ++steps;
    bool called = false;
    for (const auto& call : spec.calls) {
      if (!call.guard(StateView(state, call.reads, call.id))) continue;
      called = true;
      Tokens arg = call.argument(state);
      ++stats.children;
      Tokens result = run_agent(spec, arg, budget, depth + 1, stats);
      for (std::size_t i = 0; i < result.size(); ++i) state.set({call.result_name, i}, result[i]);
      state.set(call.result_name + "_len", std::uint64_t{result.size()});
    }
    if (called) continue;
    Fired f = collect(m, state);
    if (f.ids.empty()) throw StuckError(m.name + ": no rule enabled in a non-halted state");
    for (const auto& u : f.updates) state.set(u.loc, u.value);
  }
  stats.steps += steps;
  return m.output(state);
}

}  // namespace

RasmRun rasm_run(const RasmSpec& spec, std::span<const Token> input, std::size_t budget) {
  if (budget == 0) throw DomainError("budget must be at least 1");
  AgentStats stats;
  Tokens out = run_agent(spec, input, budget, 0, stats);
  return {std::move(out), stats.children, stats.max_depth, stats.steps};
}

namespace {

AsmValue nat(std::uint64_t n) { return n; }

std::uint64_t nat_at(const AsmState& s, const char* name) { return as_nat(s.get(name)); }

// Loads a well-formed constructor-order bin_pos sequence into in(i), n.
AsmState load_input(std::span<const Token> input) {
  Term t = delinearize(input, bin_pos_def());
  Tokens canon = linearize(t).tokens;
  AsmState s;
  for (std::size_t i = 0; i < canon.size(); ++i) s.set({"in", i}, canon[i]);
  s.set("n", nat(canon.size()));
  return s;
}

Tokens read_out(const AsmState& s, const char* name = "out") {
  Tokens out;
  const std::uint64_t len = as_nat(s.get(std::string(name) + "_len"));
  for (std::uint64_t i = 0; i < len; ++i) out.push_back(as_token(s.get({name, i})));
  return out;
}

GuardedRule clause_rule(const char* ctor, const char* emit, bool done) {
  GuardedRule r;
  r.id = std::string("s.") + ctor;
  r.reads = {"head", "emit"};
  r.guard = [ctor](const StateView& v) {
    const AsmValue& h = v.get("head");
    return is_undef(v.get("emit")) && !is_undef(h) && as_token(h) == ctor;
  };
  r.updates = [emit, done](const AsmState&) {
    UpdateSet u{{"emit", Token(emit)}};
    if (done) u.push_back({"done", true});
    return u;
  };
  return r;
}

AsmMachine build_successor_asm() {
  AsmMachine m;
  m.name = "successor_asm";
  m.rules.push_back(clause_rule("01", "X0", true));
  m.rules.push_back(clause_rule("X0", "X1", true));
  m.rules.push_back(clause_rule("X1", "X0", false));

  GuardedRule clock;
  clock.id = "clock";
  clock.reads = {"emit"};
  clock.guard = [](const StateView& v) { return !is_undef(v.get("emit")); };
  clock.updates = [](const AsmState& s) {
    const std::uint64_t len = nat_at(s, "out_len");
    const std::uint64_t pos = nat_at(s, "pos");
    UpdateSet u{{{"out", len}, s.get("emit")}, {"out_len", nat(len + 1)}, {"emit", {}}};
    if (truthy(s.get("done"))) {
      // 01 is kept by its clause (s 01 = X0 01); X0 is replaced by X1.
      const bool keep_head = as_token(s.get("head")) == "01";
      u.push_back({"tail", true});
      u.push_back({"t", nat(keep_head ? pos : pos + 1)});
      u.push_back({"head", {}});
    } else {
      u.push_back({"pos", nat(pos + 1)});
      u.push_back({"head", s.get({"in", pos + 1})});
    }
    return u;
  };
  m.rules.push_back(std::move(clock));

  GuardedRule copy;
  copy.id = "copy";
  copy.reads = {"tail", "t", "n"};
  copy.guard = [](const StateView& v) {
    return truthy(v.get("tail")) && as_nat(v.get("t")) < as_nat(v.get("n"));
  };
  copy.updates = [](const AsmState& s) {
    const std::uint64_t len = nat_at(s, "out_len");
    const std::uint64_t t = nat_at(s, "t");
    return UpdateSet{{{"out", len}, s.get({"in", t})}, {"out_len", nat(len + 1)}, {"t", nat(t + 1)}};
  };
  m.rules.push_back(std::move(copy));

  m.init = [](std::span<const Token> input) {
    AsmState s = load_input(input);
    s.set("pos", nat(0));
    s.set("head", s.get({"in", 0}));
    s.set("out_len", nat(0));
    return s;
  };
  m.halted = [](const AsmState& s) {
    return truthy(s.get("tail")) && as_nat(s.get("t")) == as_nat(s.get("n"));
  };
  m.output = [](const AsmState& s) { return read_out(s); };
  return m;
}

RasmSpec build_successor_rasm() {
  RasmSpec spec;
  AsmMachine& m = spec.machine;
  m.name = "successor_rasm";

  auto head_is = [](const StateView& v, const char* ctor) { return as_token(v.get("head")) == ctor; };

  GuardedRule base;
  base.id = "s.01";
  base.reads = {"head", "out_len"};
  base.guard = [head_is](const StateView& v) { return is_undef(v.get("out_len")) && head_is(v, "01"); };
  base.updates = [](const AsmState&) {
    return UpdateSet{{{"out", 0}, Token("X0")}, {{"out", 1}, Token("01")}, {"out_len", nat(2)}};
  };
  m.rules.push_back(std::move(base));

  GuardedRule flip;
  flip.id = "s.X0";
  flip.reads = {"head", "out_len"};
  flip.guard = [head_is](const StateView& v) { return is_undef(v.get("out_len")) && head_is(v, "X0"); };
  flip.updates = [](const AsmState& s) {
    const std::uint64_t n = nat_at(s, "n");
    UpdateSet u{{{"out", 0}, Token("X1")}, {"out_len", nat(n)}};
    for (std::uint64_t i = 1; i < n; ++i) u.push_back({{"out", i}, s.get({"in", i})});
    return u;
  };
  m.rules.push_back(std::move(flip));

  GuardedRule ret;
  ret.id = "s.X1.return";
  ret.reads = {"head", "out_len", "result_len"};
  ret.guard = [head_is](const StateView& v) {
    return is_undef(v.get("out_len")) && !is_undef(v.get("result_len")) && head_is(v, "X1");
  };
  ret.updates = [](const AsmState& s) {
    const std::uint64_t k = nat_at(s, "result_len");
    UpdateSet u{{{"out", 0}, Token("X0")}, {"out_len", nat(k + 1)}};
    for (std::uint64_t i = 0; i < k; ++i) u.push_back({{"out", i + 1}, s.get({"result", i})});
    return u;
  };
  m.rules.push_back(std::move(ret));

  m.init = [](std::span<const Token> input) {
    AsmState s = load_input(input);
    s.set("head", s.get({"in", 0}));
    return s;
  };
  m.halted = [](const AsmState& s) { return !is_undef(s.get("out_len")); };
  m.output = [](const AsmState& s) { return read_out(s); };

  RasmCall call;
  call.id = "s.X1.call";
  call.reads = {"head", "result_len"};
  call.guard = [head_is](const StateView& v) { return is_undef(v.get("result_len")) && head_is(v, "X1"); };
  call.argument = [](const AsmState& s) {
    Tokens tail;
    const std::uint64_t n = nat_at(s, "n");
    for (std::uint64_t i = 1; i < n; ++i) tail.push_back(as_token(s.get({"in", i})));
    return tail;
  };
  spec.calls.push_back(std::move(call));
  return spec;
}

}  // namespace

const AsmMachine& successor_asm() {
  static const AsmMachine m = build_successor_asm();
  return m;
}

const RasmSpec& successor_rasm() {
  static const RasmSpec spec = build_successor_rasm();
  return spec;
}

}  // namespace structrec
