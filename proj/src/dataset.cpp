#include "structrec/dataset.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_set>

#include "structrec/shortcut.hpp"
#include "structrec/trace_format.hpp"

namespace structrec {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Stream ids keep the draws of different generators independent.
enum Stream : std::uint64_t {
  kRandomValues = 1,
  kTrainTrees = 2,
  kPadding = 3,
  kOversample = 4,
  kTestTrees = 100,
};

const Reducer& reducer() {
  static const Reducer r;
  return r;
}

Tokens in_order(const Term& t, SeqOrder order) {
  TokenSeq seq = linearize(t);
  return order == SeqOrder::constructor_reverse ? seq.tokens : reorder(seq, order).tokens;
}

void require_numeric_order(SeqOrder order) {
  if (order == SeqOrder::tree_appendix) throw DomainError("successor data needs reverse or natural order");
}

ExampleRecord successor_record(std::uint64_t n, SeqOrder order, std::string task, std::string id) {
  Term in = bin_encode(n);
  NormalForm nf = reducer().normalize(apply_program("s", in));
  ExampleRecord r;
  r.id = std::move(id);
  r.task = std::move(task);
  r.order = order;
  r.input = in_order(in, order);
  r.target = in_order(nf.result.term(), order);
  r.meta.value = n;
  r.meta.bits = bit_length(n);
  r.meta.depth = nf.levels;
  r.meta.edge_group = edge_group(n);
  return r;
}

bool bernoulli(std::mt19937_64& rng, double p) {
  constexpr std::uint64_t kScale = std::uint64_t{1} << 53;
  return static_cast<double>(draw_below(rng, kScale)) < p * static_cast<double>(kScale);
}

Term grow(std::mt19937_64& rng, std::size_t level, std::size_t depth, double p,
          std::string_view alphabet) {
  std::string label(1, alphabet[draw_below(rng, alphabet.size())]);
  auto child = [&] {
    return level < depth && bernoulli(rng, p) ? grow(rng, level + 1, depth, p, alphabet) : leaf();
  };
  Term l = child();
  Term r = child();
  return branch(label, std::move(l), std::move(r));
}

const std::set<std::string, std::less<>>& structural_tokens() {
  static const std::set<std::string, std::less<>> s{
      std::string(kPadToken),      std::string(kOpenParen),     std::string(kCloseParen),
      std::string(kLeafToken),     std::string(kUnrollOpen),    std::string(kUnrollClose),
      std::string(kEmptyToken),    std::string(kParenSeparator), std::string(kArrowSeparator)};
  return s;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t n) {
  if (n == 0) throw DomainError("draw_below(0)");
  const std::uint64_t threshold = (0 - n) % n;
  std::uint64_t x = rng();
  while (x < threshold) x = rng();
  return x % n;
}

Records gen_successor_range(std::uint64_t lo, std::uint64_t hi, SeqOrder order) {
  require_numeric_order(order);
  if (lo == 0 || lo > hi || hi > (std::uint64_t{1} << 31)) {
    throw DomainError("successor range must satisfy 1 <= lo <= hi <= 2^31");
  }
  Records out;
  out.reserve(hi - lo + 1);
  for (std::uint64_t n = lo; n <= hi; ++n) {
    out.push_back(successor_record(n, order, "successor", "successor-" + std::to_string(n)));
  }
  return out;
}

Records gen_successor_random(std::size_t lo_bits, std::size_t hi_bits, std::size_t count,
                             std::uint64_t seed, SeqOrder order, std::optional<ValueRange> exclude) {
  require_numeric_order(order);
  if (lo_bits == 0 || lo_bits > hi_bits || hi_bits > 63) {
    throw DomainError("bit range must satisfy 1 <= lo <= hi <= 63");
  }
  if (count == 0) throw DomainError("count must be at least 1");
  for (std::size_t b = lo_bits; b <= hi_bits && exclude; ++b) {
    const std::uint64_t first = std::uint64_t{1} << (b - 1);
    const std::uint64_t last = (std::uint64_t{1} << b) - 1;
    if (exclude->contains(first) && exclude->contains(last)) {
      throw DomainError("bit length " + std::to_string(b) + " lies inside the excluded range");
    }
  }
  Records out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::mt19937_64 rng(derive_seed(seed, kRandomValues, i));
    std::uint64_t v = 0;
    do {
      const std::size_t bits = lo_bits + draw_below(rng, hi_bits - lo_bits + 1);
      const std::uint64_t base = std::uint64_t{1} << (bits - 1);
      v = base + draw_below(rng, base);
    } while (exclude && exclude->contains(v));
    out.push_back(successor_record(v, order, "random", "random-" + std::to_string(i)));
  }
  return out;
}

Records gen_edge_cases(std::size_t lo_bits, std::size_t hi_bits, SeqOrder order) {
  require_numeric_order(order);
  Records out;
  for (const auto& group : edge_inputs(lo_bits, hi_bits)) {
    for (const auto& m : group.members) {
      out.push_back(successor_record(m.value, order, "edge",
                                     "edge" + std::to_string(group.id) + "-" + std::to_string(m.bits)));
    }
  }
  return out;
}

Records gen_single_step(std::uint64_t lo, std::uint64_t hi) {
  if (lo == 0 || lo > hi || hi > (std::uint64_t{1} << 31)) {
    throw DomainError("range must satisfy 1 <= lo <= hi <= 2^31");
  }
  Records out;
  for (std::uint64_t n = lo; n <= hi; ++n) {
    Expr state = apply_program("s", bin_encode(n));
    std::size_t j = 0;
    while (auto step = reducer().step_single(state)) {
      ExampleRecord r;
      r.id = "single_step-" + std::to_string(n) + "-" + std::to_string(j++);
      r.task = "single_step";
      r.input = render_paren(state);
      r.target = render_paren(step->after);
      r.meta.value = n;
      r.meta.bits = bit_length(n);
      r.meta.depth = 1;
      r.meta.edge_group = edge_group(n);
      out.push_back(std::move(r));
      state = std::move(step->after);
    }
  }
  return out;
}

std::string tree_key(const Term& tree) { return join_tokens(tree_serialize(tree).tokens); }

std::uint64_t count_trees_of_depth(std::size_t d, std::size_t alphabet_size) {
  constexpr std::uint64_t kCap = std::uint64_t{1} << 63;
  auto step = [&](std::uint64_t t) -> std::uint64_t {
    if (t >= kCap) return kCap;
    const long double v = 1.0L + static_cast<long double>(alphabet_size) * t * t;
    return v >= static_cast<long double>(kCap) ? kCap : static_cast<std::uint64_t>(v);
  };
  std::uint64_t prev = 1;  // depth <= 0: Leaf only
  if (d == 0) return 1;
  for (std::size_t i = 1; i < d; ++i) prev = step(prev);
  const std::uint64_t upto = step(prev);
  return upto >= kCap ? kCap : upto - prev;
}

Term sample_tree(std::mt19937_64& rng, std::size_t depth, std::string_view alphabet) {
  if (depth == 0) throw DomainError("a sampled tree needs depth >= 1");
  if (alphabet.empty()) throw DomainError("empty alphabet");
  // Calibrated so deep trees stay sparse; rejection fixes the exact depth.
  const double p = 0.5 + 0.5 / static_cast<double>(depth);
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    Term t = grow(rng, 1, depth, p, alphabet);
    if (tree_depth(t) == depth) return t;
  }
  throw DomainError("could not sample a tree of depth " + std::to_string(depth));
}

TreeSplit gen_trees(const TreeSpec& spec) {
  if (spec.depth_lo == 0) throw DomainError("tree depth must be at least 1 (a Leaf carries no value)");
  if (spec.depth_lo > spec.depth_hi) throw DomainError("empty depth range");
  if (spec.alphabet.empty()) throw DomainError("empty alphabet");
  if (std::set<char>(spec.alphabet.begin(), spec.alphabet.end()).size() != spec.alphabet.size()) {
    throw DomainError("alphabet letters must be distinct");
  }
  const std::size_t depths = spec.depth_hi - spec.depth_lo + 1;
  std::vector<std::uint64_t> available(depths);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < depths; ++i) {
    available[i] = count_trees_of_depth(spec.depth_lo + i, spec.alphabet.size());
    total = std::min<std::uint64_t>(total + available[i], std::uint64_t{1} << 63);
  }
  if (spec.train + spec.test > total) {
    throw DomainError("requested " + std::to_string(spec.train + spec.test) + " trees but only " +
                      std::to_string(total) + " distinct structures exist");
  }

  std::unordered_set<std::string> seen;
  std::vector<std::uint64_t> used(depths, 0);
  TreeSplit out;
  for (std::size_t i = 0; i < depths; ++i) {
    const std::size_t quota = spec.test / depths + (i < spec.test % depths ? 1 : 0);
    if (quota > available[i]) {
      throw DomainError("depth " + std::to_string(spec.depth_lo + i) + " has only " +
                        std::to_string(available[i]) + " distinct trees");
    }
    for (std::uint64_t attempt = 0, got = 0; got < quota; ++attempt) {
      std::mt19937_64 rng(derive_seed(spec.seed, kTestTrees + spec.depth_lo + i, attempt));
      Term t = sample_tree(rng, spec.depth_lo + i, spec.alphabet);
      if (!seen.insert(tree_key(t)).second) continue;
      out.test.push_back(std::move(t));
      ++used[i];
      ++got;
    }
  }
  for (std::uint64_t attempt = 0; out.train.size() < spec.train; ++attempt) {
    std::mt19937_64 rng(derive_seed(spec.seed, kTrainTrees, attempt));
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < depths; ++i) {
      if (used[i] < available[i]) open.push_back(i);
    }
    const std::size_t i = open[draw_below(rng, open.size())];
    Term t = sample_tree(rng, spec.depth_lo + i, spec.alphabet);
    if (!seen.insert(tree_key(t)).second) continue;
    out.train.push_back(std::move(t));
    ++used[i];
  }
  return out;
}

Records gen_traversal(std::span<const Term> trees, std::string_view program,
                      std::optional<std::size_t> k, std::string_view id_prefix) {
  if (program != "preorder" && program != "inorder") {
    throw DomainError("traversal program must be preorder or inorder");
  }
  if (k && *k == 0) throw DomainError("k must be at least 1 for the reduction variant");
  if (trees.empty()) throw DomainError("no trees to traverse");
  Records out;
  out.reserve(trees.size());
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const Term& t = trees[i];
    Expr call = apply_program(program, t);
    ExampleRecord r;
    r.id = std::string(id_prefix) + std::string(program) + (k ? "-k" + std::to_string(*k) : "") + "-" +
           std::to_string(i);
    r.task = k ? std::string(program) + "_k" + std::to_string(*k) : std::string(program);
    r.order = SeqOrder::tree_appendix;
    r.input = tree_serialize(t).tokens;
    NormalForm nf = reducer().normalize(call);
    if (k) {
      r.target = render_unroll(reducer().reduce_k(call, *k).result);
    } else {
      r.target.assign(nf.result.tokens().begin(), nf.result.tokens().end());
    }
    r.meta.depth = nf.levels;
    r.meta.tree_depth = tree_depth(t);
    out.push_back(std::move(r));
  }
  return out;
}

Records gen_traces_successor(std::uint64_t lo, std::uint64_t hi) {
  if (lo == 0 || lo > hi) throw DomainError("range must satisfy 1 <= lo <= hi");
  Records out;
  for (std::uint64_t n = lo; n <= hi; ++n) {
    Term in = bin_encode(n);
    Reduction red = reducer().reduce(apply_program("s", in));
    ExampleRecord r;
    r.id = "trace-s-" + std::to_string(n);
    r.task = "trace_s";
    r.input = linearize(in).tokens;
    r.target = split_trace_tokens(render_trace(red.trace, TraceStyle::paren));
    r.meta.value = n;
    r.meta.bits = bit_length(n);
    r.meta.depth = red.trace.levels();
    r.meta.edge_group = edge_group(n);
    out.push_back(std::move(r));
  }
  return out;
}

Records gen_traces_traversal(std::span<const Term> trees, std::string_view program) {
  if (program != "preorder" && program != "inorder") {
    throw DomainError("traversal program must be preorder or inorder");
  }
  Records out;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    Reduction red = reducer().reduce(apply_program(program, trees[i]));
    ExampleRecord r;
    r.id = "trace-" + std::string(program) + "-" + std::to_string(i);
    r.task = "trace_" + std::string(program);
    r.order = SeqOrder::tree_appendix;
    r.input = tree_serialize(trees[i]).tokens;
    r.target = split_trace_tokens(render_trace(red.trace, TraceStyle::arrow));
    r.meta.depth = red.trace.levels();
    r.meta.tree_depth = tree_depth(trees[i]);
    out.push_back(std::move(r));
  }
  return out;
}

Records apply_padding(Records records, std::size_t max_pad, std::uint64_t seed) {
  if (max_pad == 0) return records;
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::mt19937_64 rng(derive_seed(seed, kPadding, i));
    const std::size_t p = draw_below(rng, max_pad + 1);
    auto& r = records[i];
    r.input.insert(r.input.begin(), p, Token(kPadToken));
    r.target.insert(r.target.begin(), p, Token(kPadToken));
    r.meta.pad_len += p;
  }
  return records;
}

Records strip_padding(Records records) {
  for (auto& r : records) {
    const std::size_t p = r.meta.pad_len;
    auto padded = [p](const Tokens& t) {
      return t.size() >= p && std::all_of(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(p),
                                          [](const Token& x) { return x == kPadToken; });
    };
    if (!padded(r.input) || !padded(r.target)) {
      throw DomainError("record " + r.id + " does not start with its recorded padding");
    }
    r.input.erase(r.input.begin(), r.input.begin() + static_cast<std::ptrdiff_t>(p));
    r.target.erase(r.target.begin(), r.target.begin() + static_cast<std::ptrdiff_t>(p));
    r.meta.pad_len = 0;
  }
  return records;
}

Records oversample(const Records& records, std::size_t k1, std::size_t k2, std::uint64_t seed) {
  if (k1 == 0 || k2 == 0) throw DomainError("oversampling factors must be at least 1");
  Records out;
  for (const auto& r : records) {
    const std::size_t copies = r.meta.edge_group == 1 ? k1 : r.meta.edge_group == 2 ? k2 : 1;
    out.insert(out.end(), copies, r);
  }
  std::mt19937_64 rng(derive_seed(seed, kOversample, 0));
  portable_shuffle(out, rng);
  return out;
}

Records upweight(Records records, std::size_t k1, std::size_t k2) {
  if (k1 == 0 || k2 == 0) throw DomainError("weight factors must be at least 1");
  for (auto& r : records) {
    if (r.meta.edge_group == 1) r.meta.weight = static_cast<double>(k1);
    if (r.meta.edge_group == 2) r.meta.weight = static_cast<double>(k2);
  }
  return records;
}

Records remap(Records records, const VocabRemap& sigma) {
  const auto& structural = structural_tokens();
  for (const auto& [from, to] : sigma.mapping()) {
    if (structural.contains(to)) throw DomainError("remap target '" + to + "' is a structural token");
  }
  auto apply = [&](Tokens& tokens) {
    for (auto& t : tokens) {
      auto it = sigma.mapping().find(t);
      if (it != sigma.mapping().end()) {
        t = it->second;
      } else if (!structural.contains(t)) {
        throw DomainError("token '" + t + "' is outside the remap's domain");
      }
    }
  };
  for (auto& r : records) {
    apply(r.input);
    apply(r.target);
  }
  return records;
}

nlohmann::ordered_json to_json(const ExampleRecord& r) {
  nlohmann::ordered_json meta;
  if (r.meta.value) meta["value"] = *r.meta.value;
  if (r.meta.bits) meta["bits"] = *r.meta.bits;
  if (r.meta.depth) meta["depth"] = *r.meta.depth;
  if (r.meta.tree_depth) meta["tree_depth"] = *r.meta.tree_depth;
  meta["edge_group"] = r.meta.edge_group;
  meta["pad_len"] = r.meta.pad_len;
  meta["weight"] = r.meta.weight;
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["task"] = r.task;
  j["order"] = to_string(r.order);
  j["input"] = r.input;
  j["target"] = r.target;
  j["meta"] = std::move(meta);
  return j;
}

namespace {

[[noreturn]] void schema(const std::string& what) { throw SchemaError(0, what); }

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) schema(std::string("missing field '") + key + "'");
  return *it;
}

Tokens token_array(const nlohmann::json& j, const char* key) {
  const auto& a = field(j, key);
  if (!a.is_array()) schema(std::string("'") + key + "' must be an array of strings");
  Tokens out;
  out.reserve(a.size());
  for (const auto& t : a) {
    if (!t.is_string()) schema(std::string("'") + key + "' must be an array of strings");
    out.push_back(t.get<std::string>());
  }
  return out;
}

std::uint64_t unsigned_field(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    schema(std::string("'") + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                const char* where) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      schema("unknown field '" + key + "' in " + where);
    }
  }
}

}  // namespace

ExampleRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) schema("record must be a JSON object");
  check_keys(j, {"id", "task", "order", "input", "target", "meta"}, "record");
  ExampleRecord r;
  const auto& id = field(j, "id");
  const auto& task = field(j, "task");
  const auto& order = field(j, "order");
  if (!id.is_string() || !task.is_string() || !order.is_string()) {
    schema("'id', 'task' and 'order' must be strings");
  }
  r.id = id.get<std::string>();
  r.task = task.get<std::string>();
  try {
    r.order = parse_order(order.get<std::string>());
  } catch (const Error& e) {
    schema(e.what());
  }
  r.input = token_array(j, "input");
  r.target = token_array(j, "target");
  const auto& meta = field(j, "meta");
  if (!meta.is_object()) schema("'meta' must be an object");
  check_keys(meta, {"value", "bits", "depth", "tree_depth", "edge_group", "pad_len", "weight"}, "meta");
  if (meta.contains("value")) r.meta.value = unsigned_field(meta, "value");
  if (meta.contains("bits")) r.meta.bits = unsigned_field(meta, "bits");
  if (meta.contains("depth")) r.meta.depth = unsigned_field(meta, "depth");
  if (meta.contains("tree_depth")) r.meta.tree_depth = unsigned_field(meta, "tree_depth");
  const std::uint64_t group = unsigned_field(meta, "edge_group");
  if (group > 2) schema("'edge_group' must be 0, 1 or 2");
  r.meta.edge_group = static_cast<int>(group);
  r.meta.pad_len = unsigned_field(meta, "pad_len");
  const auto& w = field(meta, "weight");
  if (!w.is_number() || w.get<double>() <= 0) schema("'weight' must be a positive number");
  r.meta.weight = w.get<double>();
  return r;
}

std::string to_jsonl(std::span<const ExampleRecord> records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  return out;
}

void write_jsonl(std::span<const ExampleRecord> records, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  const std::string text = to_jsonl(records);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw IoError("write to " + path.string() + " failed");
}

Records parse_jsonl(std::istream& in) {
  Records out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(n, std::string("invalid JSON: ") + e.what());
    } catch (const SchemaError& e) {
      const std::string msg = e.what();
      throw SchemaError(n, msg.substr(msg.find(": ") + 2));
    }
  }
  return out;
}

Records read_jsonl(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  return parse_jsonl(f);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return sha256_hex(buf.str());
}

void DatasetSpec::validate() const {
  static const std::set<std::string, std::less<>> tasks{"successor", "random", "edge",
                                                       "single_step", "traversal", "traces"};
  if (!tasks.contains(task)) throw DomainError("unknown task '" + task + "'");
  if (k1 == 0 || k2 == 0) throw DomainError("oversampling factors must be at least 1");
  if (k && *k == 0) throw DomainError("k must be at least 1");
  const bool numeric = task == "successor" || task == "random" || task == "edge";
  if (numeric && order == SeqOrder::tree_appendix) {
    throw DomainError("successor data needs reverse or natural order");
  }
  if ((task == "successor" || task == "single_step" || (task == "traces" && program == "s")) &&
      (range.lo == 0 || range.lo > range.hi)) {
    throw DomainError("value range must satisfy 1 <= lo <= hi");
  }
  if ((task == "random" || task == "edge") && (bits_lo == 0 || bits_lo > bits_hi)) {
    throw DomainError("bit range must satisfy 1 <= lo <= hi");
  }
  if ((task == "traversal" || task == "traces") && program != "preorder" && program != "inorder" &&
      !(task == "traces" && program == "s")) {
    throw DomainError("unknown program '" + program + "'");
  }
}

nlohmann::ordered_json DatasetSpec::to_json() const {
  nlohmann::ordered_json j;
  j["task"] = task;
  j["order"] = to_string(order);
  j["range"] = {range.lo, range.hi};
  j["bits"] = {bits_lo, bits_hi};
  j["count"] = count;
  j["exclude"] = exclude ? nlohmann::ordered_json{exclude->lo, exclude->hi} : nlohmann::ordered_json();
  j["trees"] = {{"depths", {trees.depth_lo, trees.depth_hi}},
                {"alphabet", trees.alphabet},
                {"train", trees.train},
                {"test", trees.test}};
  j["program"] = program;
  j["k"] = k ? nlohmann::ordered_json(*k) : nlohmann::ordered_json();
  j["remap"] = remap.to_string();
  j["pad_max"] = pad_max;
  j["k1"] = k1;
  j["k2"] = k2;
  j["upweight"] = upweight;
  j["seed"] = seed;
  return j;
}

std::vector<NamedSplit> generate(const DatasetSpec& spec) {
  spec.validate();
  std::vector<NamedSplit> splits;
  if (spec.task == "successor") {
    splits.push_back({"train", gen_successor_range(spec.range.lo, spec.range.hi, spec.order)});
  } else if (spec.task == "random") {
    splits.push_back({"random", gen_successor_random(spec.bits_lo, spec.bits_hi, spec.count, spec.seed,
                                                     spec.order, spec.exclude)});
  } else if (spec.task == "edge") {
    Records all = gen_edge_cases(spec.bits_lo, spec.bits_hi, spec.order);
    NamedSplit g1{"edge_group1", {}};
    NamedSplit g2{"edge_group2", {}};
    for (auto& r : all) (r.meta.edge_group == 1 ? g1 : g2).records.push_back(std::move(r));
    splits.push_back(std::move(g1));
    splits.push_back(std::move(g2));
  } else if (spec.task == "single_step") {
    splits.push_back({"single_step", gen_single_step(spec.range.lo, spec.range.hi)});
  } else if (spec.task == "traces" && spec.program == "s") {
    splits.push_back({"traces", gen_traces_successor(spec.range.lo, spec.range.hi)});
  } else {
    TreeSpec ts = spec.trees;
    ts.seed = spec.seed;
    TreeSplit trees = gen_trees(ts);
    if (spec.task == "traces") {
      splits.push_back({"train", gen_traces_traversal(trees.train, spec.program)});
      splits.push_back({"test", gen_traces_traversal(trees.test, spec.program)});
    } else {
      splits.push_back({"train", gen_traversal(trees.train, spec.program, spec.k, "train-")});
      splits.push_back({"test", gen_traversal(trees.test, spec.program, spec.k, "test-")});
    }
  }
  for (auto& s : splits) {
    if (!spec.remap.empty()) s.records = remap(std::move(s.records), spec.remap);
    if (spec.k1 > 1 || spec.k2 > 1) {
      s.records = spec.upweight ? upweight(std::move(s.records), spec.k1, spec.k2)
                                : oversample(s.records, spec.k1, spec.k2, spec.seed);
    }
    if (spec.pad_max > 0) s.records = apply_padding(std::move(s.records), spec.pad_max, spec.seed);
  }
  return splits;
}

nlohmann::ordered_json write_dataset(const DatasetSpec& spec, std::span<const NamedSplit> splits,
                                     const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& s : splits) {
    const std::string name = s.name + ".jsonl";
    const std::string text = to_jsonl(s.records);
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw IoError("cannot open " + (dir / name).string() + " for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw IoError("write to " + (dir / name).string() + " failed");
    files.push_back({{"split", s.name}, {"file", name}, {"records", s.records.size()},
                     {"sha256", sha256_hex(text)}});
  }
  nlohmann::ordered_json manifest;
  manifest["spec"] = spec.to_json();
  manifest["seed"] = spec.seed;
  manifest["files"] = std::move(files);
  std::ofstream m(dir / "manifest.json", std::ios::binary);
  if (!m) throw IoError("cannot open " + (dir / "manifest.json").string() + " for writing");
  m << manifest.dump(2) << "\n";
  if (!m) throw IoError("write to manifest failed");
  return manifest;
}

}  // namespace structrec
