#include "structrec/eval.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_map>

namespace structrec {

namespace {

[[noreturn]] void schema(std::size_t line, const std::string& what) { throw SchemaError(line, what); }

PredictionRecord prediction_from_json(const nlohmann::json& j, std::size_t line) {
  if (!j.is_object()) schema(line, "prediction must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "id" && key != "candidates") schema(line, "unknown field '" + key + "'");
  }
  auto id = j.find("id");
  if (id == j.end() || !id->is_string()) schema(line, "'id' must be a string");
  auto cands = j.find("candidates");
  if (cands == j.end() || !cands->is_array() || cands->empty()) {
    schema(line, "'candidates' must be a non-empty array");
  }
  PredictionRecord p;
  p.id = id->get<std::string>();
  for (const auto& c : *cands) {
    if (c.is_string()) {
      p.candidates.push_back(split_tokens(c.get<std::string>()));
    } else if (c.is_array()) {
      Tokens t;
      for (const auto& tok : c) {
        if (!tok.is_string()) schema(line, "candidate tokens must be strings");
        // Tokens with inner whitespace are split so "X0 01" and ["X0","01"] agree.
        for (auto& part : split_tokens(tok.get<std::string>())) t.push_back(std::move(part));
      }
      p.candidates.push_back(std::move(t));
    } else {
      schema(line, "a candidate must be a string or an array of strings");
    }
  }
  return p;
}

bool hit_within(const PredictionRecord& p, const Tokens& target, std::size_t k) {
  const std::size_t limit = std::min(k, p.candidates.size());
  for (std::size_t i = 0; i < limit; ++i) {
    if (p.candidates[i] == target) return true;
  }
  return false;
}

std::optional<std::uint64_t> key_of(const ExampleRecord& r, BreakdownKey key) {
  switch (key) {
    case BreakdownKey::bits:
      if (r.meta.bits) return *r.meta.bits;
      return std::nullopt;
    case BreakdownKey::depth:
      if (r.meta.depth) return *r.meta.depth;
      return std::nullopt;
    case BreakdownKey::edge_group: return static_cast<std::uint64_t>(r.meta.edge_group);
    case BreakdownKey::tree_depth:
      if (r.meta.tree_depth) return *r.meta.tree_depth;
      return std::nullopt;
  }
  return std::nullopt;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string trim_line_ends(const std::string& text) {
  std::string out;
  std::size_t start = 0;
  for (std::size_t nl; (nl = text.find('\n', start)) != std::string::npos; start = nl + 1) {
    const auto line = text.substr(start, nl - start);
    out += line.substr(0, line.find_last_not_of(' ') + 1) + "\n";
  }
  return out + text.substr(start);
}

std::string pad_right(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

Predictions parse_predictions(std::istream& in) {
  Predictions out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      schema(n, std::string("invalid JSON: ") + e.what());
    }
    out.push_back(prediction_from_json(j, n));
  }
  return out;
}

Predictions read_predictions(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  return parse_predictions(f);
}

std::vector<const PredictionRecord*> align(std::span<const PredictionRecord> preds,
                                           std::span<const ExampleRecord> gold) {
  std::unordered_map<std::string_view, const PredictionRecord*> by_id;
  for (const auto& p : preds) {
    if (!by_id.emplace(p.id, &p).second) throw IdMismatch("duplicate prediction id '" + p.id + "'");
  }
  std::set<std::string_view> gold_ids;
  std::vector<const PredictionRecord*> out;
  out.reserve(gold.size());
  for (const auto& g : gold) {
    if (!gold_ids.insert(g.id).second) throw IdMismatch("duplicate gold id '" + g.id + "'");
    auto it = by_id.find(g.id);
    if (it == by_id.end()) throw IdMismatch("no prediction for id '" + g.id + "'");
    out.push_back(it->second);
  }
  if (by_id.size() != gold.size()) {
    for (const auto& p : preds) {
      if (!gold_ids.contains(p.id)) throw IdMismatch("prediction id '" + p.id + "' is not in the gold set");
    }
  }
  return out;
}

double hit_at_k(std::span<const PredictionRecord> preds, std::span<const ExampleRecord> gold,
                std::size_t k) {
  if (k == 0) throw DomainError("k must be at least 1");
  auto aligned = align(preds, gold);
  if (gold.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += hit_within(*aligned[i], gold[i].target, k);
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

double exact_match(std::span<const PredictionRecord> preds, std::span<const ExampleRecord> gold) {
  return hit_at_k(preds, gold, 1);
}

std::string_view to_string(BreakdownKey key) {
  switch (key) {
    case BreakdownKey::bits: return "bits";
    case BreakdownKey::depth: return "depth";
    case BreakdownKey::edge_group: return "edge_group";
    case BreakdownKey::tree_depth: return "tree_depth";
  }
  return "?";
}

BreakdownKey parse_breakdown_key(std::string_view text) {
  if (text == "bits" || text == "bit_length") return BreakdownKey::bits;
  if (text == "depth") return BreakdownKey::depth;
  if (text == "edge_group") return BreakdownKey::edge_group;
  if (text == "tree_depth") return BreakdownKey::tree_depth;
  throw DomainError("unknown breakdown key '" + std::string(text) + "'");
}

Breakdown breakdown(std::span<const PredictionRecord> preds, std::span<const ExampleRecord> gold,
                    BreakdownKey key, std::span<const std::size_t> ks) {
  auto aligned = align(preds, gold);
  Breakdown out;
  out.key = key;
  out.ks.assign(ks.begin(), ks.end());
  if (out.ks.empty()) out.ks = {1};
  std::map<std::uint64_t, std::pair<BucketRow, std::vector<std::size_t>>> buckets;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto k = key_of(gold[i], key);
    if (!k) throw DomainError("record " + gold[i].id + " has no " + std::string(to_string(key)));
    auto& [row, hits] = buckets[*k];
    hits.resize(out.ks.size());
    row.key = *k;
    ++row.n;
    row.correct += hit_within(*aligned[i], gold[i].target, 1);
    for (std::size_t j = 0; j < out.ks.size(); ++j) hits[j] += hit_within(*aligned[i], gold[i].target, out.ks[j]);
  }
  for (auto& [_, entry] : buckets) {
    auto& [row, hits] = entry;
    for (std::size_t h : hits) row.hit.push_back(static_cast<double>(h) / static_cast<double>(row.n));
    out.rows.push_back(std::move(row));
  }
  return out;
}

MetricsReport evaluate(std::span<const PredictionRecord> preds, std::span<const ExampleRecord> gold,
                       std::vector<std::size_t> ks, std::span<const BreakdownKey> keys) {
  if (ks.empty()) ks = {1};
  if (std::find(ks.begin(), ks.end(), 0) != ks.end()) throw DomainError("k must be at least 1");
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  auto aligned = align(preds, gold);
  MetricsReport r;
  r.n = gold.size();
  r.ks = ks;
  for (auto sig : {FailureSignature::one_token_short, FailureSignature::one_token_long,
                   FailureSignature::wrong_token, FailureSignature::other}) {
    r.signatures[sig] = 0;
  }
  std::vector<std::size_t> hits(ks.size(), 0);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& first = aligned[i]->candidates.front();
    if (first == gold[i].target) {
      ++r.correct;
    } else {
      ++r.signatures[failure_signature(first, gold[i].target)];
    }
    for (std::size_t j = 0; j < ks.size(); ++j) hits[j] += hit_within(*aligned[i], gold[i].target, ks[j]);
  }
  const double n = static_cast<double>(r.n);
  r.accuracy = r.n == 0 ? 0.0 : static_cast<double>(r.correct) / n;
  for (std::size_t h : hits) r.hit.push_back(r.n == 0 ? 0.0 : static_cast<double>(h) / n);

  std::vector<BreakdownKey> wanted{BreakdownKey::edge_group};
  auto all_have = [&](BreakdownKey k) {
    return !gold.empty() &&
           std::all_of(gold.begin(), gold.end(), [&](const ExampleRecord& g) { return key_of(g, k).has_value(); });
  };
  if (all_have(BreakdownKey::bits)) wanted.push_back(BreakdownKey::bits);
  if (all_have(BreakdownKey::tree_depth)) wanted.push_back(BreakdownKey::tree_depth);
  for (auto k : keys) {
    if (std::find(wanted.begin(), wanted.end(), k) == wanted.end()) wanted.push_back(k);
  }
  for (auto k : wanted) r.breakdowns.push_back(breakdown(preds, gold, k, ks));
  return r;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "text") return ReportFormat::text;
  if (text == "json" || text == "structured") return ReportFormat::json;
  throw DomainError("unknown report format '" + std::string(text) + "'");
}

std::string render_report(const MetricsReport& r, ReportFormat format) {
  if (format == ReportFormat::json) {
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["correct"] = r.correct;
    j["accuracy"] = r.accuracy;
    nlohmann::ordered_json hit;
    for (std::size_t i = 0; i < r.ks.size(); ++i) hit["hit@" + std::to_string(r.ks[i])] = r.hit[i];
    j["hit"] = std::move(hit);
    nlohmann::ordered_json sigs;
    for (const auto& [sig, count] : r.signatures) sigs[std::string(to_string(sig))] = count;
    j["failures"] = std::move(sigs);
    nlohmann::ordered_json tables = nlohmann::ordered_json::array();
    for (const auto& b : r.breakdowns) {
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (const auto& row : b.rows) {
        nlohmann::ordered_json jr;
        jr[std::string(to_string(b.key))] = row.key;
        jr["n"] = row.n;
        jr["accuracy"] = row.accuracy();
        for (std::size_t i = 0; i < b.ks.size(); ++i) jr["hit@" + std::to_string(b.ks[i])] = row.hit[i];
        rows.push_back(std::move(jr));
      }
      tables.push_back({{"key", to_string(b.key)}, {"rows", std::move(rows)}});
    }
    j["breakdowns"] = std::move(tables);
    return j.dump(2) + "\n";
  }

  std::string out;
  out += pad_right("N", 14) + std::to_string(r.n) + "\n";
  out += pad_right("accuracy", 14) + fixed(r.accuracy) + "\n";
  for (std::size_t i = 0; i < r.ks.size(); ++i) {
    out += pad_right("hit@" + std::to_string(r.ks[i]), 14) + fixed(r.hit[i]) + "\n";
  }
  out += pad_right("failures", 14);
  bool first = true;
  for (const auto& [sig, count] : r.signatures) {
    out += (first ? "" : " ") + std::string(to_string(sig)) + "=" + std::to_string(count);
    first = false;
  }
  out += "\n";
  for (const auto& b : r.breakdowns) {
    out += "\n" + pad_right(std::string(to_string(b.key)), 12) + pad_right("n", 8) + pad_right("acc", 10);
    for (auto k : b.ks) out += pad_right("hit@" + std::to_string(k), 10);
    out += "\n";
    for (const auto& row : b.rows) {
      out += pad_right(std::to_string(row.key), 12) + pad_right(std::to_string(row.n), 8) +
             pad_right(fixed(row.accuracy()), 10);
      for (double h : row.hit) out += pad_right(fixed(h), 10);
      out += "\n";
    }
  }
  return trim_line_ends(out);
}

std::string_view to_string(TraceError label) {
  switch (label) {
    case TraceError::illegal_rule: return "illegal-rule";
    case TraceError::token_mutation: return "token-mutation";
    case TraceError::missing_termination: return "missing-termination";
    case TraceError::premature_termination: return "premature-termination";
    case TraceError::rule_order_swap: return "rule-order-swap";
    case TraceError::malformed_state: return "malformed-state";
  }
  return "?";
}

namespace {

struct Alternative {
  TraceError label;
  ProgramSet programs;
};

ProgramSet builtins_with(const Program& replacement) {
  ProgramSet ps;
  for (const char* name : {"s", "add", "preorder", "inorder"}) {
    ps.add(name == replacement.name() ? replacement : builtin_programs().at(name));
  }
  return ps;
}

// Misread rules: one clause body used for another constructor of the same shape.
std::vector<Alternative> clause_swaps(const Program& p) {
  std::vector<Alternative> out;
  auto clauses = p.clauses();
  for (std::size_t a = 0; a < clauses.size(); ++a) {
    for (std::size_t b = a + 1; b < clauses.size(); ++b) {
      const Clause& ca = clauses[a];
      const Clause& cb = clauses[b];
      if (ca.child_vars.size() != cb.child_vars.size() || ca.payload_vars.size() != cb.payload_vars.size()) {
        continue;
      }
      std::vector<Clause> swapped(clauses.begin(), clauses.end());
      swapped[a] = Clause{ca.constructor, cb.payload_vars, cb.child_vars, cb.body, cb.rule_id};
      swapped[b] = Clause{cb.constructor, ca.payload_vars, ca.child_vars, ca.body, ca.rule_id};
      out.push_back({TraceError::illegal_rule,
                     builtins_with(Program(p.name(), p.scrutinee(), p.extra_params(), std::move(swapped)))});
    }
  }
  return out;
}

std::vector<Alternative> order_swaps(std::string_view program) {
  using P = TraversalPart;
  std::array<P, 3> canon = program == "preorder" ? std::array<P, 3>{P::Value, P::Left, P::Right}
                                                 : std::array<P, 3>{P::Left, P::Value, P::Right};
  std::array<P, 3> perm{P::Left, P::Value, P::Right};
  std::vector<Alternative> out;
  do {
    if (perm != canon) {
      out.push_back({TraceError::rule_order_swap, builtins_with(traversal_program(std::string(program), perm))});
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

const std::vector<Alternative>& alternatives(std::string_view program) {
  static const std::map<std::string, std::vector<Alternative>, std::less<>> table = [] {
    std::map<std::string, std::vector<Alternative>, std::less<>> t;
    t["s"] = clause_swaps(builtin_programs().at("s"));
    for (const char* name : {"preorder", "inorder"}) {
      auto alts = order_swaps(name);
      for (auto& a : clause_swaps(builtin_programs().at(name))) alts.push_back(std::move(a));
      t[name] = std::move(alts);
    }
    return t;
  }();
  return table.find(program)->second;
}

struct TraceSyntax {
  TraceStyle style;
  bool single_step;
};

TraceSyntax syntax_for(std::string_view program) {
  if (program == "s") return {TraceStyle::paren, true};
  if (program == "preorder" || program == "inorder") return {TraceStyle::arrow, false};
  throw DomainError("no trace format registered for program '" + std::string(program) + "'");
}

TraceJudgment bad(std::size_t step, TraceError label, std::string detail) {
  return {false, step, label, std::move(detail)};
}

}  // namespace

std::string trace_program_for_task(std::string_view task) {
  if (task.starts_with("trace_")) task.remove_prefix(6);
  if (task == "s" || task == "successor") return "s";
  if (task == "preorder" || task == "inorder") return std::string(task);
  throw DomainError("no trace program for task '" + std::string(task) + "'");
}

TraceJudgment validate_trace(std::string_view text, std::string_view program,
                             const std::optional<Term>& input) {
  const TraceSyntax syn = syntax_for(program);
  const std::string prog(program);
  auto parse = [&](const Tokens& tokens) {
    return syn.style == TraceStyle::paren ? parse_paren(tokens, prog, bin_pos_def())
                                          : parse_unroll(tokens, prog);
  };
  auto render = [&](const Expr& e) {
    return syn.style == TraceStyle::paren ? render_paren(e) : render_unroll(e);
  };
  auto step = [&](const Reducer& r, const Expr& e) {
    return syn.single_step ? r.step_single(e) : r.step_level(e);
  };
  const Reducer oracle;

  const auto states = split_trace_states(text, syn.style);
  std::vector<Expr> parsed;
  parsed.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    try {
      parsed.push_back(parse(states[i]));
    } catch (const Error& e) {
      return bad(i, TraceError::malformed_state, e.what());
    }
    const Tokens cand = render(parsed[i]);
    if (i == 0) {
      const Expr& s0 = parsed[0];
      if (s0.kind() != Expr::Kind::Call) {
        return bad(0, TraceError::token_mutation, "state 0 is not a single pending call");
      }
      if (input && !(s0 == apply_program(prog, *input))) {
        return bad(0, TraceError::token_mutation, "state 0 does not match the input");
      }
      continue;
    }
    const Expr& prev = parsed[i - 1];
    if (prev.is_normal()) {
      return bad(i, TraceError::missing_termination, "reduction continued past normal form");
    }
    std::optional<ReductionStep> expected;
    try {
      expected = step(oracle, prev);
    } catch (const Error& e) {
      return bad(i - 1, TraceError::malformed_state, e.what());
    }
    if (expected && render(expected->after) == cand) continue;
    for (const auto& alt : alternatives(program)) {
      try {
        auto other = step(Reducer(alt.programs), prev);
        if (other && render(other->after) == cand) {
          return bad(i, alt.label, "state matches a step under a misapplied rule");
        }
      } catch (const Error&) {
        // the alternative rule set cannot step this state
      }
    }
    // Wrong granularity: one call instead of a whole level, or two steps at once.
    try {
      auto partial = syn.single_step ? std::nullopt : oracle.step_single(prev);
      auto twice = expected ? step(oracle, expected->after) : std::nullopt;
      if ((partial && render(partial->after) == cand) || (twice && render(twice->after) == cand)) {
        return bad(i, TraceError::illegal_rule, "state is not exactly one reduction step on");
      }
    } catch (const Error&) {
      // no alternative step exists
    }
    if (i + 1 == states.size() && parsed[i].is_normal()) {
      return bad(i, TraceError::premature_termination, "trace stops before normal form");
    }
    return bad(i, TraceError::token_mutation,
               "expected " + join_tokens(render(expected->after)) + ", got " + join_tokens(cand));
  }
  if (!parsed.back().is_normal()) {
    return bad(parsed.size(), TraceError::missing_termination, "final state is not in normal form");
  }
  return {};
}

TraceReport validate_trace_file(std::istream& in, std::string_view program) {
  TraceReport report;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    TraceJudgment j;
    if (line[start] == '{') {
      ExampleRecord rec;
      try {
        rec = record_from_json(nlohmann::json::parse(line));
        if (rec.meta.pad_len > 0) rec = strip_padding({rec}).front();
      } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(n, std::string("invalid JSON: ") + e.what());
      } catch (const SchemaError& e) {
        const std::string msg = e.what();
        throw SchemaError(n, msg.substr(msg.find(": ") + 2));
      }
      const std::string prog = program.empty() ? trace_program_for_task(rec.task) : std::string(program);
      std::optional<Term> input;
      try {
        if (prog == "s") {
          TokenSeq seq{rec.input, rec.order};
          if (rec.order == SeqOrder::natural) seq = reorder(seq, SeqOrder::constructor_reverse);
          input = delinearize(seq.tokens, bin_pos_def());
        } else {
          input = tree_parse(rec.input);
        }
      } catch (const ParseError& e) {
        throw SchemaError(n, std::string("record input does not parse: ") + e.what());
      }
      j = validate_trace(join_tokens(rec.target), prog, input);
    } else {
      if (program.empty()) throw DomainError("plain trace lines need an explicit program");
      j = validate_trace(line, program);
    }
    ++report.n;
    if (j.valid) {
      ++report.valid;
    } else {
      ++report.labels[*j.label];
      report.failures.emplace_back(n, std::move(j));
    }
  }
  return report;
}

std::string render_trace_report(const TraceReport& r, ReportFormat format) {
  static constexpr std::array kLabels{TraceError::illegal_rule,        TraceError::token_mutation,
                                      TraceError::missing_termination, TraceError::premature_termination,
                                      TraceError::rule_order_swap,     TraceError::malformed_state};
  auto count = [&](TraceError e) {
    auto it = r.labels.find(e);
    return it == r.labels.end() ? std::size_t{0} : it->second;
  };
  const double rate = r.n == 0 ? 0.0 : static_cast<double>(r.valid) / static_cast<double>(r.n);
  if (format == ReportFormat::json) {
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["valid"] = r.valid;
    j["valid_rate"] = rate;
    nlohmann::ordered_json labels;
    for (auto e : kLabels) labels[std::string(to_string(e))] = count(e);
    j["labels"] = std::move(labels);
    nlohmann::ordered_json fails = nlohmann::ordered_json::array();
    for (const auto& [line, judgment] : r.failures) {
      fails.push_back({{"line", line},
                       {"step", *judgment.first_bad_step},
                       {"label", to_string(*judgment.label)},
                       {"detail", judgment.detail}});
    }
    j["failures"] = std::move(fails);
    return j.dump(2) + "\n";
  }
  std::string out;
  out += pad_right("N", 24) + std::to_string(r.n) + "\n";
  out += pad_right("valid", 24) + std::to_string(r.valid) + "\n";
  out += pad_right("valid rate", 24) + fixed(rate) + "\n";
  for (auto e : kLabels) out += pad_right(std::string(to_string(e)), 24) + std::to_string(count(e)) + "\n";
  for (const auto& [line, judgment] : r.failures) {
    out += "line " + std::to_string(line) + ": step " + std::to_string(*judgment.first_bad_step) + " " +
           std::string(to_string(*judgment.label)) + ": " + judgment.detail + "\n";
  }
  return out;
}

}  // namespace structrec
