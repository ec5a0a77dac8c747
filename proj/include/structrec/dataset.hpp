#pragma once

// Deterministic dataset generation for the successor and traversal tasks,
// plus the record-level transforms applied on top (remapping, edge-case
// oversampling, padding) and JSONL persistence.
//
// Every random draw comes from a generator seeded by
// derive_seed(seed, stream, index), so output does not depend on
// generation order or scheduling.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "structrec/reduction.hpp"
#include "structrec/term.hpp"

namespace structrec {

inline constexpr std::string_view kPadToken = "PAD";
inline constexpr std::uint64_t kDefaultSeed = 20240601;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);
// Uniform in [0, n). Same sequence on every platform, unlike
// std::uniform_int_distribution.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t n);
// Fisher-Yates with draw_below.
template <class T>
void portable_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[draw_below(rng, i)]);
  }
}

struct RecordMeta {
  std::optional<std::uint64_t> value;
  std::optional<std::size_t> bits;
  // Reduction levels to normal form.
  std::optional<std::size_t> depth;
  std::optional<std::size_t> tree_depth;
  int edge_group = 0;
  std::size_t pad_len = 0;
  double weight = 1.0;

  friend bool operator==(const RecordMeta&, const RecordMeta&) = default;
};

struct ExampleRecord {
  std::string id;
  std::string task;
  SeqOrder order = SeqOrder::constructor_reverse;
  Tokens input;
  Tokens target;
  RecordMeta meta;

  friend bool operator==(const ExampleRecord&, const ExampleRecord&) = default;
};

using Records = std::vector<ExampleRecord>;

// Successor pairs for every value in lo..hi (1 <= lo <= hi <= 2^31).
// Throws DomainError for the tree order or a bad range.
Records gen_successor_range(std::uint64_t lo, std::uint64_t hi, SeqOrder order);

struct ValueRange {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  bool contains(std::uint64_t v) const { return lo <= v && v <= hi; }
};

// `count` values: bit length uniform in lo_bits..hi_bits (at most 63),
// then value uniform among values of that length. Draws inside `exclude`
// are redrawn. Throws DomainError if a bit length lies entirely inside it.
Records gen_successor_random(std::size_t lo_bits, std::size_t hi_bits, std::size_t count,
                             std::uint64_t seed, SeqOrder order,
                             std::optional<ValueRange> exclude = std::nullopt);

// One record per group member and bit length, group 1 first.
Records gen_edge_cases(std::size_t lo_bits, std::size_t hi_bits, SeqOrder order);

// Consecutive paren-form states of s(n) for n in lo..hi: input is a state,
// target is the state after one step_single.
Records gen_single_step(std::uint64_t lo, std::uint64_t hi);

struct TreeSpec {
  std::size_t depth_lo = 5;
  std::size_t depth_hi = 6;
  std::string alphabet = "abc";
  std::size_t train = 20000;
  // Spread evenly over the depth range, remainder to the shallowest depths.
  std::size_t test = 1000;
  std::uint64_t seed = kDefaultSeed;
};

struct TreeSplit {
  std::vector<Term> train;
  std::vector<Term> test;
};

// Canonical structure key: the serialized tree.
std::string tree_key(const Term& tree);

// Number of distinct trees of exactly depth d over `alphabet_size` labels,
// saturating at 2^63.
std::uint64_t count_trees_of_depth(std::size_t d, std::size_t alphabet_size);

// Test trees are drawn first (per depth), then train trees; no structure
// appears twice or in both splits. Throws DomainError for depth 0, an
// empty alphabet, or more trees than exist.
TreeSplit gen_trees(const TreeSpec& spec);

// A tree of exactly `depth`, labels uniform from `alphabet`.
Term sample_tree(std::mt19937_64& rng, std::size_t depth, std::string_view alphabet);

// Full traversal targets when k is empty, else the state after k levels in
// the UNROLL grammar. Throws DomainError when k == 0.
Records gen_traversal(std::span<const Term> trees, std::string_view program,
                      std::optional<std::size_t> k, std::string_view id_prefix = {});

// Rendered oracle traces; the target holds the trace tokens including the
// state separators.
Records gen_traces_successor(std::uint64_t lo, std::uint64_t hi);
Records gen_traces_traversal(std::span<const Term> trees, std::string_view program);

// Prefixes input and target with the same p ~ Uniform{0..P} PAD tokens.
Records apply_padding(Records records, std::size_t max_pad, std::uint64_t seed);
Records strip_padding(Records records);

// Group-1 records k1 times, group-2 records k2 times, then shuffled.
Records oversample(const Records& records, std::size_t k1, std::size_t k2, std::uint64_t seed);
// Sets meta.weight to k1 / k2 on edge records instead of duplicating.
Records upweight(Records records, std::size_t k1, std::size_t k2);

Records remap(Records records, const VocabRemap& sigma);

nlohmann::ordered_json to_json(const ExampleRecord& r);
// Throws SchemaError (line 0) on a malformed object.
ExampleRecord record_from_json(const nlohmann::json& j);

std::string to_jsonl(std::span<const ExampleRecord> records);
// Throws IoError.
void write_jsonl(std::span<const ExampleRecord> records, const std::filesystem::path& path);
// Throws IoError, or SchemaError carrying the 1-based line number.
Records read_jsonl(const std::filesystem::path& path);
Records parse_jsonl(std::istream& in);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Everything that determines a generated dataset.
struct DatasetSpec {
  // successor | random | edge | single_step | traversal | traces
  std::string task = "successor";
  SeqOrder order = SeqOrder::constructor_reverse;
  ValueRange range{1, 131072};
  std::size_t bits_lo = 18;
  std::size_t bits_hi = 41;
  std::size_t count = 1000;
  std::optional<ValueRange> exclude;
  TreeSpec trees;
  // preorder | inorder | s
  std::string program = "inorder";
  std::optional<std::size_t> k;
  VocabRemap remap;
  std::size_t pad_max = 0;
  std::size_t k1 = 1;
  std::size_t k2 = 1;
  // Edge factors become weights instead of copies.
  bool upweight = false;
  std::uint64_t seed = kDefaultSeed;

  // Throws DomainError.
  void validate() const;
  nlohmann::ordered_json to_json() const;
};

struct NamedSplit {
  std::string name;
  Records records;
};

// Runs the generator for spec.task, then remap, oversample or upweight,
// and padding, in that order.
std::vector<NamedSplit> generate(const DatasetSpec& spec);

// Writes <dir>/<split>.jsonl for every split and <dir>/manifest.json with
// the DatasetSpec, seed, record counts and SHA-256 digests. Returns the manifest.
nlohmann::ordered_json write_dataset(const DatasetSpec& spec, std::span<const NamedSplit> splits,
                                     const std::filesystem::path& dir);

}  // namespace structrec
