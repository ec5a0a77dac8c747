#include "doctest.h"

#include <fstream>
#include <set>
#include <sstream>

#include "structrec/dataset.hpp"

using namespace structrec;

namespace {

Tokens toks(std::string_view s) { return split_tokens(s); }

// Low bit first, the leading one last.
Tokens reverse_binary(std::uint64_t n) {
  Tokens out;
  for (; n > 1; n >>= 1) out.push_back(n & 1 ? "X1" : "X0");
  out.push_back("01");
  return out;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("structrec_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("successor range") {
  auto r = gen_successor_range(1, 3, SeqOrder::constructor_reverse);
  REQUIRE(r.size() == 3);
  CHECK(r[0].input == toks("01"));
  CHECK(r[0].target == toks("X0 01"));
  CHECK(r[1].input == toks("X0 01"));
  CHECK(r[1].target == toks("X1 01"));
  CHECK(r[2].input == toks("X1 01"));
  CHECK(r[2].target == toks("X0 X0 01"));
  CHECK(r[2].meta.edge_group == 1);
  CHECK(r[2].meta.depth == 2);

  auto nat = gen_successor_range(1, 64, SeqOrder::natural);
  for (const auto& rec : nat) {
    CHECK(rec.input.front() == "01");
    CHECK(rec.target.front() == "01");
  }
  CHECK_THROWS_AS(gen_successor_range(1, 3, SeqOrder::tree_appendix), DomainError);
  CHECK_THROWS_AS(gen_successor_range(0, 3, SeqOrder::natural), DomainError);
  CHECK_THROWS_AS(gen_successor_range(4, 3, SeqOrder::natural), DomainError);
}

TEST_CASE("successor targets match binary arithmetic") {
  for (const auto& rec : gen_successor_range(1, 4096, SeqOrder::constructor_reverse)) {
    REQUIRE(rec.meta.value);
    CHECK(rec.input == reverse_binary(*rec.meta.value));
    CHECK(rec.target == reverse_binary(*rec.meta.value + 1));
  }
}

TEST_CASE("random set is seeded and honours bit bounds") {
  auto a = gen_successor_random(18, 41, 500, 7, SeqOrder::constructor_reverse, ValueRange{1, 131072});
  auto b = gen_successor_random(18, 41, 500, 7, SeqOrder::constructor_reverse, ValueRange{1, 131072});
  auto c = gen_successor_random(18, 41, 500, 8, SeqOrder::constructor_reverse);
  CHECK(a == b);
  CHECK(a != c);
  std::set<std::size_t> seen_bits;
  for (const auto& r : a) {
    REQUIRE(r.meta.value);
    CHECK(*r.meta.value > 131072);
    CHECK(*r.meta.bits >= 18);
    CHECK(*r.meta.bits <= 41);
    CHECK(r.target == reverse_binary(*r.meta.value + 1));
    seen_bits.insert(*r.meta.bits);
  }
  CHECK(seen_bits.size() > 15);
  // every 17-bit value is excluded
  CHECK_THROWS_AS(gen_successor_random(17, 20, 5, 1, SeqOrder::natural, ValueRange{1, 131072}),
                  DomainError);
  CHECK_THROWS_AS(gen_successor_random(3, 64, 5, 1, SeqOrder::natural), DomainError);
  CHECK_THROWS_AS(gen_successor_random(3, 5, 0, 1, SeqOrder::natural), DomainError);
}

TEST_CASE("draw_below is uniform enough and bounded") {
  std::mt19937_64 rng(derive_seed(1, 2, 3));
  std::array<int, 6> hist{};
  for (int i = 0; i < 60000; ++i) ++hist[draw_below(rng, 6)];
  for (int h : hist) CHECK(std::abs(h - 10000) < 500);
  CHECK_THROWS_AS(draw_below(rng, 0), DomainError);
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
}

TEST_CASE("edge case records") {
  auto r = gen_edge_cases(2, 5, SeqOrder::constructor_reverse);
  REQUIRE(r.size() == 4 + 3);
  CHECK(r[0].meta.edge_group == 1);
  CHECK(r[0].input == toks("X1 01"));
  CHECK(r[6].meta.edge_group == 2);
  CHECK(r[6].input == toks("X1 X1 X1 X0 01"));
}

TEST_CASE("single step records") {
  auto r = gen_single_step(5, 5);
  REQUIRE(r.size() == 2);
  CHECK(r[0].input == toks("( X1 X0 01 )"));
  CHECK(r[0].target == toks("X0 ( X0 01 )"));
  CHECK(r[1].target == toks("X0 X1 01"));
  auto one = gen_single_step(1, 2);
  CHECK(one[0].input == toks("( 01 )"));
  CHECK(one[0].target == toks("X0 01"));
  CHECK(one[1].input == toks("( X0 01 )"));
  CHECK(one[1].target == toks("X1 01"));
}

TEST_CASE("tree counts") {
  CHECK(count_trees_of_depth(1, 3) == 3);
  CHECK(count_trees_of_depth(2, 3) == 3 * 4 * 4 - 3);
  CHECK(count_trees_of_depth(40, 3) == std::uint64_t{1} << 63);
}

TEST_CASE("tree splits are disjoint with exact depths") {
  TreeSpec spec;
  spec.depth_lo = 3;
  spec.depth_hi = 4;
  spec.train = 300;
  spec.test = 51;
  spec.seed = 11;
  auto s = gen_trees(spec);
  REQUIRE(s.train.size() == 300);
  REQUIRE(s.test.size() == 51);
  std::set<std::string> keys;
  std::size_t test_d3 = 0;
  for (const auto& t : s.test) {
    CHECK(keys.insert(tree_key(t)).second);
    test_d3 += tree_depth(t) == 3;
  }
  CHECK(test_d3 == 26);
  for (const auto& t : s.train) {
    CHECK(keys.insert(tree_key(t)).second);
    CHECK(tree_depth(t) >= 3);
    CHECK(tree_depth(t) <= 4);
  }
  auto again = gen_trees(spec);
  CHECK(std::equal(s.train.begin(), s.train.end(), again.train.begin()));

  TreeSpec tiny{1, 1, "ab", 1, 1, 3};
  auto t = gen_trees(tiny);
  CHECK(tree_key(t.train[0]) != tree_key(t.test[0]));
  tiny.train = 2;
  CHECK_THROWS_AS(gen_trees(tiny), DomainError);
  tiny.depth_lo = 0;
  CHECK_THROWS_AS(gen_trees(tiny), DomainError);
  tiny = TreeSpec{1, 1, "", 1, 1, 3};
  CHECK_THROWS_AS(gen_trees(tiny), DomainError);
}

TEST_CASE("traversal records") {
  Term cat = branch("a", branch("c", leaf(), leaf()), branch("t", leaf(), leaf()));
  std::vector<Term> trees{cat};
  auto full = gen_traversal(trees, "inorder", std::nullopt);
  REQUIRE(full.size() == 1);
  CHECK(full[0].input == toks("a ( c LEAF LEAF ) ( t LEAF LEAF )"));
  CHECK(full[0].target == toks("c a t"));
  CHECK(full[0].meta.tree_depth == 2);
  auto pre = gen_traversal(trees, "preorder", std::nullopt);
  CHECK(pre[0].target == toks("a c t"));
  auto k1 = gen_traversal(trees, "inorder", 1);
  CHECK(k1[0].target == toks("UNROLL[ c LEAF LEAF ] a UNROLL[ t LEAF LEAF ]"));
  CHECK_THROWS_AS(gen_traversal(trees, "inorder", 0), DomainError);
  CHECK_THROWS_AS(gen_traversal(trees, "postorder", std::nullopt), DomainError);
}

TEST_CASE("trace records") {
  auto r = gen_traces_successor(11, 11);
  REQUIRE(r.size() == 1);
  CHECK(r[0].target == toks("( X1 X1 X0 01 ) = X0 ( X1 X0 01 ) = X0 X0 ( X0 01 ) = X0 X0 X1 01"));
}

TEST_CASE("padding round trip") {
  auto base = gen_successor_range(1, 200, SeqOrder::natural);
  auto padded = apply_padding(base, 4, 99);
  bool any = false;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const auto p = padded[i].meta.pad_len;
    CHECK(p <= 4);
    any = any || p > 0;
    CHECK(padded[i].input.size() == base[i].input.size() + p);
    CHECK(padded[i].target.size() == base[i].target.size() + p);
  }
  CHECK(any);
  CHECK(strip_padding(padded) == base);
  CHECK(apply_padding(base, 4, 99) == padded);
  auto broken = padded;
  for (auto& r : broken) {
    if (r.meta.pad_len > 0) {
      r.input[0] = "X1";
      break;
    }
  }
  CHECK_THROWS_AS(strip_padding(broken), DomainError);
}

TEST_CASE("oversampling and weights") {
  auto base = gen_successor_range(1, 64, SeqOrder::constructor_reverse);
  std::size_t g1 = 0, g2 = 0;
  for (const auto& r : base) {
    g1 += r.meta.edge_group == 1;
    g2 += r.meta.edge_group == 2;
  }
  auto over = oversample(base, 5, 3, 1);
  CHECK(over.size() == base.size() + 4 * g1 + 2 * g2);
  std::size_t o1 = 0;
  for (const auto& r : over) o1 += r.meta.edge_group == 1;
  CHECK(o1 == 5 * g1);
  CHECK(over != oversample(base, 5, 3, 2));
  CHECK(over == oversample(base, 5, 3, 1));
  auto w = upweight(base, 5, 3);
  CHECK(w.size() == base.size());
  for (const auto& r : w) {
    CHECK(r.meta.weight == (r.meta.edge_group == 1 ? 5.0 : r.meta.edge_group == 2 ? 3.0 : 1.0));
  }
  CHECK_THROWS_AS(oversample(base, 0, 1, 1), DomainError);
}

TEST_CASE("remap records") {
  auto base = gen_successor_range(1, 8, SeqOrder::constructor_reverse);
  auto sigma = VocabRemap::parse("X0=a,X1=b,01=c");
  auto m = remap(base, sigma);
  CHECK(m[4].input == toks("b a c"));
  CHECK(remap(m, sigma.inverse()) == base);
  CHECK_THROWS_AS(remap(base, VocabRemap::parse("X0=a,X1=b")), DomainError);
  CHECK_THROWS_AS(remap(base, VocabRemap::parse("X0=PAD,X1=b,01=c")), DomainError);
}

TEST_CASE("jsonl round trip and schema errors") {
  DatasetSpec spec;
  spec.task = "traversal";
  spec.trees = TreeSpec{2, 3, "abc", 20, 6, 0};
  spec.pad_max = 2;
  auto splits = generate(spec);
  REQUIRE(splits.size() == 2);
  const auto text = to_jsonl(splits[0].records);
  std::istringstream in(text);
  CHECK(parse_jsonl(in) == splits[0].records);

  std::istringstream bad("{\"id\":\"a\",\"task\":\"t\",\"order\":\"reverse\",\"input\":[],\"target\":[],"
                         "\"meta\":{\"edge_group\":0,\"pad_len\":0,\"weight\":1}}\n{not json}\n");
  try {
    parse_jsonl(bad);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 2);
  }
  std::istringstream extra("{\"id\":\"a\",\"task\":\"t\",\"order\":\"reverse\",\"input\":[],\"target\":[],"
                           "\"meta\":{\"edge_group\":0,\"pad_len\":0,\"weight\":1},\"x\":1}\n");
  CHECK_THROWS_AS(parse_jsonl(extra), SchemaError);
  std::istringstream missing("{\"id\":\"a\"}\n");
  CHECK_THROWS_AS(parse_jsonl(missing), SchemaError);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("datasets are byte identical across runs") {
  DatasetSpec spec;
  spec.task = "random";
  spec.count = 50;
  spec.k1 = 2;
  spec.pad_max = 3;
  const auto d1 = scratch_dir("a");
  const auto d2 = scratch_dir("b");
  auto m1 = write_dataset(spec, generate(spec), d1);
  auto m2 = write_dataset(spec, generate(spec), d2);
  CHECK(m1 == m2);
  CHECK(slurp(d1 / "random.jsonl") == slurp(d2 / "random.jsonl"));
  CHECK(slurp(d1 / "manifest.json") == slurp(d2 / "manifest.json"));
  CHECK(m1["files"][0]["sha256"] == sha256_file(d1 / "random.jsonl"));
  CHECK(read_jsonl(d1 / "random.jsonl").size() == 50);
  spec.seed += 1;
  write_dataset(spec, generate(spec), d2);
  CHECK(slurp(d1 / "random.jsonl") != slurp(d2 / "random.jsonl"));
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST_CASE("dataset spec validation") {
  DatasetSpec spec;
  spec.task = "bogus";
  CHECK_THROWS_AS(spec.validate(), DomainError);
  spec.task = "successor";
  spec.order = SeqOrder::tree_appendix;
  CHECK_THROWS_AS(spec.validate(), DomainError);
  spec.order = SeqOrder::natural;
  spec.range = {5, 4};
  CHECK_THROWS_AS(spec.validate(), DomainError);
  spec.range = {1, 4};
  CHECK_NOTHROW(spec.validate());
  CHECK_THROWS_AS(read_jsonl("/nonexistent/x.jsonl"), IoError);
}
