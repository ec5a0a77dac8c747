#include "structrec/shortcut.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "structrec/reduction.hpp"

namespace structrec {

std::string_view to_string(ShortcutOrder order) {
  return order == ShortcutOrder::natural ? "natural" : "reverse";
}

std::string_view to_string(ShortcutMode mode) {
  return mode == ShortcutMode::faithful ? "faithful" : "corrected";
}

ShortcutOrder parse_shortcut_order(std::string_view text) {
  if (text == "natural") return ShortcutOrder::natural;
  if (text == "reverse") return ShortcutOrder::reverse;
  throw DomainError("unknown shortcut order '" + std::string(text) + "'");
}

ShortcutMode parse_shortcut_mode(std::string_view text) {
  if (text == "faithful") return ShortcutMode::faithful;
  if (text == "corrected") return ShortcutMode::corrected;
  throw DomainError("unknown shortcut mode '" + std::string(text) + "'");
}

namespace {

AsmValue nat(std::uint64_t n) { return n; }

std::uint64_t nat_at(const AsmState& s, const char* name) { return as_nat(s.get(name)); }

std::vector<std::string> reads_of(std::span<const std::string_view> names) {
  return {names.begin(), names.end()};
}

// Canonical spellings, checked for well-formedness in the given order.
Tokens canonical(std::span<const Token> tokens, SeqOrder order) {
  TokenSeq seq{Tokens(tokens.begin(), tokens.end()), order};
  Tokens rev = order == SeqOrder::constructor_reverse
                   ? seq.tokens
                   : reorder(seq, SeqOrder::constructor_reverse).tokens;
  TokenSeq canon = linearize(delinearize(rev, bin_pos_def()));
  return order == SeqOrder::constructor_reverse ? canon.tokens
                                                : reorder(canon, order).tokens;
}

// Output length. All-ones inputs need one extra token; faithful mode
// does not add it. The lone 01 is the base clause and is always right.
std::uint64_t halt_length(std::size_t n, bool has_x0, ShortcutMode mode) {
  if (has_x0) return n;
  if (n == 1) return 2;
  return mode == ShortcutMode::corrected ? n + 1 : n;
}

AsmState load(const Tokens& canon) {
  AsmState s;
  for (std::size_t i = 0; i < canon.size(); ++i) s.set({"in", i}, canon[i]);
  s.set("n", nat(canon.size()));
  s.set("pos", nat(0));
  return s;
}

GuardedRule emit_rule(std::string id, std::vector<std::string> reads,
                      std::function<bool(const StateView&)> guard, std::function<AsmValue(const AsmState&)> token,
                      bool sets_switched = false) {
  GuardedRule r;
  r.id = std::move(id);
  r.reads = std::move(reads);
  r.guard = std::move(guard);
  r.updates = [token = std::move(token), sets_switched](const AsmState& s) {
    const std::uint64_t pos = nat_at(s, "pos");
    UpdateSet u{{{"out", pos}, token(s)}, {"pos", nat(pos + 1)}};
    if (sets_switched) u.push_back({"switched", true});
    return u;
  };
  return r;
}

GuardedRule halt_rule(std::vector<std::string> reads) {
  GuardedRule r;
  r.id = "halt";
  r.reads = std::move(reads);
  r.guard = [](const StateView& v) {
    return !truthy(v.get("done")) && as_nat(v.get("pos")) == as_nat(v.get("halt"));
  };
  r.updates = [](const AsmState&) { return UpdateSet{{"done", true}}; };
  return r;
}

Tokens read_prefix(const AsmState& s) {
  Tokens out;
  const std::uint64_t len = nat_at(s, "pos");
  for (std::uint64_t i = 0; i < len; ++i) out.push_back(as_token(s.get({"out", i})));
  return out;
}

AsmValue input_at_pos(const AsmState& s) { return s.get({"in", nat_at(s, "pos")}); }

AsmMachine build_natural(ShortcutMode mode) {
  const auto reads = reads_of(kNaturalGuardReads);
  AsmMachine m;
  m.name = std::string("natural_shortcut.") + std::string(to_string(mode));
  auto pos = [](const StateView& v) { return as_nat(v.get("pos")); };
  auto halt = [](const StateView& v) { return as_nat(v.get("halt")); };

  m.rules.push_back(emit_rule(
      "copy", reads,
      [pos](const StateView& v) {
        const AsmValue& b = v.get("boundary");
        return !is_undef(b) && pos(v) < as_nat(b);
      },
      input_at_pos));
  m.rules.push_back(emit_rule(
      "pivot", reads,
      [pos](const StateView& v) {
        const AsmValue& b = v.get("boundary");
        return !is_undef(b) && pos(v) == as_nat(b);
      },
      [](const AsmState&) { return AsmValue(Token("X1")); }));
  m.rules.push_back(emit_rule(
      "lead", reads,
      [pos](const StateView& v) { return is_undef(v.get("boundary")) && pos(v) == 0; },
      [](const AsmState&) { return AsmValue(Token("01")); }));
  m.rules.push_back(emit_rule(
      "fill", reads,
      [pos, halt](const StateView& v) {
        const AsmValue& b = v.get("boundary");
        const std::uint64_t p = pos(v);
        return p < halt(v) && (is_undef(b) ? p >= 1 : p > as_nat(b));
      },
      [](const AsmState&) { return AsmValue(Token("X0")); }));
  m.rules.push_back(halt_rule(reads));

  m.init = [mode](std::span<const Token> input) {
    Tokens canon = canonical(input, SeqOrder::natural);
    AsmState s = load(canon);
    auto last = std::find(canon.rbegin(), canon.rend(), "X0");
    const bool has_x0 = last != canon.rend();
    if (has_x0) s.set("boundary", nat(canon.size() - 1 - (last - canon.rbegin())));
    s.set("halt", nat(halt_length(canon.size(), has_x0, mode)));
    return s;
  };
  m.halted = [](const AsmState& s) { return truthy(s.get("done")); };
  m.output = read_prefix;
  return m;
}

AsmMachine build_reverse(ShortcutMode mode) {
  const auto reads = reads_of(kReverseGuardReads);
  AsmMachine m;
  m.name = std::string("reverse_shortcut.") + std::string(to_string(mode));
  auto pos = [](const StateView& v) { return as_nat(v.get("pos")); };
  auto halt = [](const StateView& v) { return as_nat(v.get("halt")); };
  auto switched = [](const StateView& v) { return truthy(v.get("switched")); };

  m.rules.push_back(emit_rule(
      "flip", reads,
      [pos, halt, switched](const StateView& v) {
        if (switched(v)) return false;
        const AsmValue& p = v.get("pivot");
        return is_undef(p) ? pos(v) + 1 < halt(v) : pos(v) < as_nat(p);
      },
      [](const AsmState&) { return AsmValue(Token("X0")); }));
  m.rules.push_back(emit_rule(
      "switch", reads,
      [pos, switched](const StateView& v) {
        const AsmValue& p = v.get("pivot");
        return !switched(v) && !is_undef(p) && pos(v) == as_nat(p);
      },
      [](const AsmState&) { return AsmValue(Token("X1")); }, true));
  m.rules.push_back(emit_rule(
      "close", reads,
      [pos, halt, switched](const StateView& v) {
        return !switched(v) && is_undef(v.get("pivot")) && pos(v) + 1 == halt(v);
      },
      [](const AsmState&) { return AsmValue(Token("01")); }, true));
  m.rules.push_back(emit_rule(
      "copy", reads,
      [pos, halt, switched](const StateView& v) { return switched(v) && pos(v) < halt(v); },
      input_at_pos));
  m.rules.push_back(halt_rule(reads));

  m.init = [mode](std::span<const Token> input) {
    Tokens canon = canonical(input, SeqOrder::constructor_reverse);
    AsmState s = load(canon);
    auto first = std::find(canon.begin(), canon.end(), "X0");
    const bool has_x0 = first != canon.end();
    if (has_x0) s.set("pivot", nat(first - canon.begin()));
    s.set("halt", nat(halt_length(canon.size(), has_x0, mode)));
    return s;
  };
  m.halted = [](const AsmState& s) { return truthy(s.get("done")); };
  m.output = read_prefix;
  return m;
}

std::size_t budget_for(std::size_t n) { return 2 * n + 8; }

}  // namespace

const AsmMachine& natural_shortcut(ShortcutMode mode) {
  static const AsmMachine faithful = build_natural(ShortcutMode::faithful);
  static const AsmMachine corrected = build_natural(ShortcutMode::corrected);
  return mode == ShortcutMode::faithful ? faithful : corrected;
}

const AsmMachine& reverse_shortcut(ShortcutMode mode) {
  static const AsmMachine faithful = build_reverse(ShortcutMode::faithful);
  static const AsmMachine corrected = build_reverse(ShortcutMode::corrected);
  return mode == ShortcutMode::faithful ? faithful : corrected;
}

const AsmMachine& shortcut_machine(ShortcutKind kind) {
  return kind.order == ShortcutOrder::natural ? natural_shortcut(kind.mode)
                                              : reverse_shortcut(kind.mode);
}

AsmRun emulate_run(ShortcutKind kind, std::span<const Token> tokens, bool keep_log) {
  return asm_run(shortcut_machine(kind), tokens, budget_for(tokens.size()), keep_log);
}

Tokens emulate(ShortcutKind kind, std::span<const Token> tokens) {
  return emulate_run(kind, tokens).output;
}

Tokens emulate_natural(std::span<const Token> tokens, ShortcutMode mode) {
  return emulate({ShortcutOrder::natural, mode}, tokens);
}

Tokens emulate_reverse(std::span<const Token> tokens, ShortcutMode mode) {
  return emulate({ShortcutOrder::reverse, mode}, tokens);
}

std::array<EdgeCaseGroup, 2> edge_inputs(std::size_t lo_bits, std::size_t hi_bits) {
  if (lo_bits > hi_bits) throw DomainError("empty bit-length range");
  if (hi_bits > 64) throw DomainError("bit lengths above 64 are not supported");
  std::array<EdgeCaseGroup, 2> groups{EdgeCaseGroup{1, {}}, EdgeCaseGroup{2, {}}};
  for (std::size_t bits = std::max<std::size_t>(lo_bits, 2); bits <= hi_bits; ++bits) {
    const std::uint64_t all_ones = bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
    groups[0].members.push_back({bits, all_ones});
    if (bits >= 3) groups[1].members.push_back({bits, 3 * (std::uint64_t{1} << (bits - 2)) - 1});
  }
  if (groups[0].members.empty()) throw DomainError("no edge inputs at bit lengths below 2");
  return groups;
}

int edge_group(std::uint64_t n) {
  if (n < 3) return 0;
  const std::size_t bits = bit_length(n);
  if ((n & (n + 1)) == 0) return 1;
  if (bits >= 3 && n == 3 * (std::uint64_t{1} << (bits - 2)) - 1) return 2;
  return 0;
}

Tokens encode_in_order(std::uint64_t n, SeqOrder order) {
  TokenSeq seq = linearize(bin_encode(n));
  return order == SeqOrder::constructor_reverse ? seq.tokens : reorder(seq, order).tokens;
}

Tokens successor_oracle(std::uint64_t n, SeqOrder order) {
  static const Reducer reducer;
  NormalForm nf = reducer.normalize(apply_program("s", bin_encode(n)));
  TokenSeq seq = linearize(nf.result.term());
  return order == SeqOrder::constructor_reverse ? seq.tokens : reorder(seq, order).tokens;
}

std::size_t DiffReport::count(FailureSignature sig) const {
  return static_cast<std::size_t>(
      std::count_if(cases.begin(), cases.end(), [sig](const DiffCase& c) { return c.signature == sig; }));
}

DiffReport diff_against_oracle(ShortcutKind kind, std::uint64_t lo, std::uint64_t hi) {
  if (lo == 0 || lo > hi) throw DomainError("value range must satisfy 1 <= lo <= hi");
  const SeqOrder order =
      kind.order == ShortcutOrder::natural ? SeqOrder::natural : SeqOrder::constructor_reverse;
  DiffReport report{kind, lo, hi, 0, {}};
  for (std::uint64_t n = lo;; ++n) {
    Tokens input = encode_in_order(n, order);
    Tokens expected = successor_oracle(n, order);
    Tokens got = emulate(kind, input);
    ++report.checked;
    if (got != expected) {
      FailureSignature sig = failure_signature(got, expected);
      report.cases.push_back({n, edge_group(n), std::move(input), std::move(expected), std::move(got), sig});
    }
    if (n == hi) break;
  }
  return report;
}

std::string render_diff_text(const DiffReport& report) {
  std::ostringstream out;
  out << "emulator     " << to_string(report.kind.order) << " " << to_string(report.kind.mode) << "\n"
      << "range        " << report.lo << ".." << report.hi << "\n"
      << "checked      " << report.checked << "\n"
      << "disagree     " << report.cases.size() << "\n";
  for (auto sig : {FailureSignature::one_token_short, FailureSignature::one_token_long,
                   FailureSignature::wrong_token, FailureSignature::other}) {
    std::string label(to_string(sig));
    label.resize(std::max<std::size_t>(label.size(), 16), ' ');
    out << "  " << label << report.count(sig) << "\n";
  }
  std::size_t by_group[3] = {0, 0, 0};
  for (const auto& c : report.cases) ++by_group[c.edge_group];
  out << "by edge group  0:" << by_group[0] << " 1:" << by_group[1] << " 2:" << by_group[2] << "\n";
  return out.str();
}

std::string render_diff_jsonl(const DiffReport& report) {
  std::string out;
  for (const auto& c : report.cases) {
    nlohmann::ordered_json j;
    j["value"] = c.value;
    j["edge_group"] = c.edge_group;
    j["input"] = c.input;
    j["expected"] = c.expected;
    j["got"] = c.got;
    j["signature"] = to_string(c.signature);
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace structrec
