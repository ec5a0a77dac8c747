#include "doctest.h"

#include <random>
#include <sstream>

#include "structrec/eval.hpp"

using namespace structrec;

namespace {

Tokens toks(std::string_view s) { return split_tokens(s); }

ExampleRecord gold_record(std::string id, std::string_view target, int group = 0) {
  ExampleRecord r;
  r.id = std::move(id);
  r.task = "successor";
  r.target = toks(target);
  r.meta.edge_group = group;
  return r;
}

PredictionRecord pred(std::string id, std::vector<std::string_view> cands) {
  PredictionRecord p;
  p.id = std::move(id);
  for (auto c : cands) p.candidates.push_back(toks(c));
  return p;
}

// Reduction trace text for s(n), built by hand from the binary digits.
std::string successor_trace(std::uint64_t n) {
  std::vector<std::string> low_first;
  for (; n > 1; n >>= 1) low_first.push_back(n & 1 ? "X1" : "X0");
  low_first.push_back("01");
  std::string out;
  std::string prefix;
  for (std::size_t i = 0;; ++i) {
    std::string rest;
    for (std::size_t j = i; j < low_first.size(); ++j) rest += low_first[j] + (j + 1 < low_first.size() ? " " : "");
    out += prefix + "( " + rest + " ) = ";
    if (low_first[i] == "X1") {
      prefix += "X0 ";
      continue;
    }
    out += prefix + (low_first[i] == "X0" ? "X1 " : "X0 ") + rest.substr(low_first[i] == "X0" ? 3 : 0);
    return out;
  }
}

}  // namespace

TEST_CASE("exact match") {
  std::vector<ExampleRecord> gold{gold_record("a", "X0 01"), gold_record("b", "X1 01"),
                                  gold_record("c", "X0 X0 01"), gold_record("d", "X1 X0 01")};
  std::vector<PredictionRecord> preds{pred("a", {"X0 01"}), pred("b", {"X1 01"}), pred("c", {"X0 X0 01"}),
                                      pred("d", {"X1 X0 01"})};
  CHECK(exact_match(preds, gold) == 1.0);
  preds[2] = pred("c", {"X0 01"});
  CHECK(exact_match(preds, gold) == 0.75);
  preds[2] = pred("c", {"X0 X0 01 PAD"});
  CHECK(exact_match(preds, gold) == 0.75);
  std::reverse(preds.begin(), preds.end());
  CHECK(exact_match(preds, gold) == 0.75);
}

TEST_CASE("hit at k") {
  std::vector<ExampleRecord> gold{gold_record("a", "X0 01")};
  std::vector<PredictionRecord> preds{pred("a", {"01", "X1 01", "X0 01", "X0"})};
  CHECK(hit_at_k(preds, gold, 1) == 0.0);
  CHECK(hit_at_k(preds, gold, 2) == 0.0);
  CHECK(hit_at_k(preds, gold, 3) == 1.0);
  CHECK(hit_at_k(preds, gold, 5) == 1.0);
  CHECK_THROWS_AS(hit_at_k(preds, gold, 0), DomainError);
  CHECK(exact_match({}, {}) == 0.0);
}

TEST_CASE("id mismatches") {
  std::vector<ExampleRecord> gold{gold_record("a", "01"), gold_record("b", "01")};
  CHECK_THROWS_AS(exact_match(std::vector{pred("a", {"01"})}, gold), IdMismatch);
  CHECK_THROWS_AS(exact_match(std::vector{pred("a", {"01"}), pred("a", {"01"}), pred("b", {"01"})}, gold),
                  IdMismatch);
  CHECK_THROWS_AS(exact_match(std::vector{pred("a", {"01"}), pred("b", {"01"}), pred("c", {"01"})}, gold),
                  IdMismatch);
  gold.push_back(gold_record("a", "01"));
  CHECK_THROWS_AS(exact_match(std::vector{pred("a", {"01"}), pred("b", {"01"})}, gold), IdMismatch);
}

TEST_CASE("prediction parsing") {
  std::istringstream in(
      "{\"id\":\"a\",\"candidates\":[[\"X0\",\"01\"],\"X1   01\"]}\n\n{\"id\":\"b\",\"candidates\":[\"01\"]}\n");
  auto p = parse_predictions(in);
  REQUIRE(p.size() == 2);
  CHECK(p[0].candidates[0] == toks("X0 01"));
  CHECK(p[0].candidates[1] == toks("X1 01"));
  std::istringstream bad("{\"id\":\"a\",\"candidates\":[\"01\"]}\n{\"id\":\"b\",\"candidates\":[]}\n");
  try {
    parse_predictions(bad);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("breakdowns") {
  auto gold = gen_successor_range(1, 64, SeqOrder::constructor_reverse);
  std::vector<PredictionRecord> preds;
  for (const auto& g : gold) {
    PredictionRecord p{g.id, {g.target}};
    if (g.meta.edge_group == 1) p.candidates[0].pop_back();
    preds.push_back(p);
  }
  auto b = breakdown(preds, gold, BreakdownKey::edge_group);
  REQUIRE(b.rows.size() == 3);
  CHECK(b.rows[0].key == 0);
  CHECK(b.rows[0].accuracy() == 1.0);
  CHECK(b.rows[1].key == 1);
  CHECK(b.rows[1].n == 5);
  CHECK(b.rows[1].accuracy() == 0.0);
  CHECK(b.rows[2].accuracy() == 1.0);

  auto d = breakdown(preds, gold, BreakdownKey::depth);
  Reducer r;
  std::size_t total = 0;
  for (const auto& row : d.rows) {
    CHECK(row.n > 0);
    total += row.n;
  }
  CHECK(total == gold.size());
  for (const auto& g : gold) CHECK(*g.meta.depth == r.recursion_depth(bin_encode(*g.meta.value), "s"));

  std::vector<ExampleRecord> two(gold.begin(), gold.begin() + 2);
  std::vector<PredictionRecord> two_p(preds.begin(), preds.begin() + 2);
  CHECK(breakdown(two_p, two, BreakdownKey::edge_group).rows.size() == 1);
  CHECK_THROWS_AS(breakdown(two_p, two, BreakdownKey::tree_depth), DomainError);
  CHECK_THROWS_AS(parse_breakdown_key("colour"), DomainError);

  auto report = evaluate(preds, gold);
  CHECK(report.signatures[FailureSignature::one_token_short] == 5);
  CHECK(report.n == 64);
}

TEST_CASE("reports") {
  auto empty = evaluate({}, {});
  const auto text = render_report(empty, ReportFormat::text);
  CHECK(text.find("N             0") != std::string::npos);
  CHECK(render_report(empty, ReportFormat::json).find("\"n\": 0") != std::string::npos);

  TreeSpec ts{3, 6, "abc", 0, 40, 5};
  auto trees = gen_trees(ts);
  auto gold = gen_traversal(trees.test, "inorder", std::nullopt);
  std::vector<PredictionRecord> preds;
  for (const auto& g : gold) preds.push_back({g.id, {g.target, toks("a")}});
  auto report = evaluate(preds, gold);
  const auto json = render_report(report, ReportFormat::json);
  CHECK(json == render_report(evaluate(preds, gold), ReportFormat::json));
  const Breakdown* depth = nullptr;
  for (const auto& b : report.breakdowns) {
    if (b.key == BreakdownKey::tree_depth) depth = &b;
  }
  REQUIRE(depth);
  REQUIRE(depth->rows.size() == 4);
  CHECK(depth->rows.front().key == 3);
  CHECK(depth->rows.back().key == 6);
  CHECK(report.hit == std::vector<double>{1.0, 1.0, 1.0});
}

TEST_CASE("metric laws on random fixtures") {
  std::mt19937_64 rng(derive_seed(3, 0, 0));
  auto gold = gen_successor_range(1, 300, SeqOrder::constructor_reverse);
  const auto pool = gen_successor_range(1, 400, SeqOrder::constructor_reverse);
  for (int round = 0; round < 20; ++round) {
    std::vector<PredictionRecord> preds;
    for (const auto& g : gold) {
      PredictionRecord p{g.id, {}};
      const std::size_t n = 1 + draw_below(rng, 7);
      for (std::size_t i = 0; i < n; ++i) {
        p.candidates.push_back(draw_below(rng, 4) == 0 ? g.target : pool[draw_below(rng, pool.size())].target);
      }
      preds.push_back(std::move(p));
    }
    const double h1 = hit_at_k(preds, gold, 1), h3 = hit_at_k(preds, gold, 3), h5 = hit_at_k(preds, gold, 5);
    CHECK(exact_match(preds, gold) == h1);
    CHECK(h1 <= h3);
    CHECK(h3 <= h5);
    auto truncated = preds;
    for (auto& p : truncated) {
      if (p.candidates.size() > 3) p.candidates.resize(3);
    }
    CHECK(hit_at_k(truncated, gold, 3) == h3);
  }
}

TEST_CASE("oracle traces validate") {
  for (std::uint64_t n = 1; n <= 2048; ++n) {
    const auto t = successor_trace(n);
    auto j = validate_trace(t, "s", bin_encode(n));
    CHECK_MESSAGE(j.valid, t);
  }
  CHECK(validate_trace("( X1 X0 01 ) = X0 ( X0 01 ) = X0 X1 01", "s").valid);
  CHECK(validate_trace("( X1 XO 01 ) = X0 ( XO 01 ) = XO X1 01", "s").valid);
  CHECK(validate_trace("(01) = X0 01", "s").valid);
  CHECK(validate_trace("UNROLL[ a ( c LEAF LEAF ) ( t LEAF LEAF ) ] -> UNROLL[ c LEAF LEAF ] a UNROLL[ t LEAF LEAF ] "
                       "-> EMPTY c EMPTY a EMPTY t EMPTY -> c a t",
                       "inorder")
            .valid);
}

TEST_CASE("illustrative wrong trace") {
  auto j = validate_trace("(X1 X0 X1 X1 01) = X0 ( X0 X1 X1 01) = X0 X1 (X1 01) = ...", "s");
  CHECK_FALSE(j.valid);
  CHECK(j.first_bad_step == 2);
  CHECK(j.label == TraceError::token_mutation);
}

TEST_CASE("trace error labels") {
  auto label = [](std::string_view t, std::string_view prog) { return validate_trace(t, prog); };
  auto swap = label("UNROLL[ a ( c LEAF LEAF ) ( t LEAF LEAF ) ] -> a UNROLL[ c LEAF LEAF ] UNROLL[ t LEAF LEAF ]",
                    "inorder");
  CHECK(swap.label == TraceError::rule_order_swap);
  CHECK(swap.first_bad_step == 1);
  CHECK(label("( X1 01 ) = X1 01", "s").label == TraceError::illegal_rule);
  CHECK(label("( X1 X1 01 ) = X0 X0 ( 01 ) = X0 X0 X0 01", "s").label == TraceError::illegal_rule);
  auto partial = label("UNROLL[ a ( c LEAF LEAF ) LEAF ] -> UNROLL[ c LEAF LEAF ] a EMPTY -> "
                       "EMPTY c EMPTY a -> c a",
                       "inorder");
  CHECK(partial.valid);
  auto one_call = label("UNROLL[ b ( a ( c LEAF LEAF ) LEAF ) ( t LEAF LEAF ) ] -> UNROLL[ a ( c LEAF LEAF ) LEAF ] b "
                        "UNROLL[ t LEAF LEAF ] -> UNROLL[ c LEAF LEAF ] a EMPTY b UNROLL[ t LEAF LEAF ]",
                        "inorder");
  CHECK(one_call.label == TraceError::illegal_rule);
  CHECK(one_call.first_bad_step == 2);
  CHECK(label("( X0 01 ) = X0 ( 01 ) = X0 X0 01", "s").label == TraceError::illegal_rule);
  auto missing = label("( X1 X1 01 ) = X0 ( X1 01 )", "s");
  CHECK(missing.label == TraceError::missing_termination);
  CHECK(missing.first_bad_step == 2);
  CHECK(label("( X0 01 ) = X1 01 = X0 X1 01", "s").label == TraceError::missing_termination);
  auto premature = label("( X1 X1 01 ) = X0 X1 01", "s");
  CHECK(premature.label == TraceError::premature_termination);
  CHECK(label("( X1 01 = X0 ( 01 )", "s").label == TraceError::malformed_state);
  CHECK(label("( X1 01 ) = X0 ( 01 ) =", "s").label == TraceError::malformed_state);
  CHECK(label("X0 01", "s").label == TraceError::token_mutation);
  auto pinned = validate_trace("( X0 01 ) = X1 01", "s", bin_encode(3));
  CHECK(pinned.label == TraceError::token_mutation);
  CHECK(pinned.first_bad_step == 0);
  CHECK_THROWS_AS(validate_trace("I", "add"), DomainError);
}

TEST_CASE("single token mutations are caught") {
  std::mt19937_64 rng(derive_seed(17, 0, 0));
  const std::vector<std::string> paren_vocab{"X0", "X1", "01", "(", ")", "="};
  for (int trial = 0; trial < 600; ++trial) {
    const std::uint64_t n = 1 + draw_below(rng, 5000);
    Tokens t = split_trace_tokens(successor_trace(n));
    const auto op = draw_below(rng, 3);
    const std::size_t pos = draw_below(rng, t.size() + (op == 0 ? 1 : 0));
    if (op == 0) {
      t.insert(t.begin() + static_cast<std::ptrdiff_t>(pos), paren_vocab[draw_below(rng, paren_vocab.size())]);
    } else if (op == 1) {
      t.erase(t.begin() + static_cast<std::ptrdiff_t>(pos));
    } else {
      std::string repl;
      do repl = paren_vocab[draw_below(rng, paren_vocab.size())];
      while (repl == t[pos]);
      t[pos] = repl;
    }
    auto j = validate_trace(join_tokens(t), "s", bin_encode(n));
    CHECK_MESSAGE(!j.valid, join_tokens(t));
    CHECK(j.label.has_value());
  }
}

TEST_CASE("trace files") {
  auto records = gen_traces_successor(1, 50);
  TreeSpec ts{2, 3, "abc", 10, 4, 1};
  auto trees = gen_trees(ts);
  auto tr = gen_traces_traversal(trees.train, "preorder");
  records.insert(records.end(), tr.begin(), tr.end());
  records = apply_padding(records, 2, 4);
  std::istringstream in(to_jsonl(records));
  auto report = validate_trace_file(in, "");
  CHECK(report.n == records.size());
  CHECK(report.valid == records.size());

  std::istringstream plain("( X1 01 ) = X0 ( 01 ) = X0 X0 01\n( X1 01 ) = X1 01\n");
  auto pr = validate_trace_file(plain, "s");
  CHECK(pr.n == 2);
  CHECK(pr.valid == 1);
  CHECK(pr.labels[TraceError::illegal_rule] == 1);
  const auto text = render_trace_report(pr, ReportFormat::text);
  CHECK(text.find("line 2: step 1 illegal-rule") != std::string::npos);
}
