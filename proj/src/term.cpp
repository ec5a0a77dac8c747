#include "structrec/term.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace structrec {

InductiveDef::InductiveDef(std::string name, std::vector<ConstructorDef> constructors)
    : name_(std::move(name)), constructors_(std::move(constructors)) {
  std::set<std::string_view> seen;
  bool has_base = false;
  for (const auto& c : constructors_) {
    if (c.name.empty()) throw DomainError(name_ + ": empty constructor name");
    if (!seen.insert(c.name).second) {
      throw DomainError(name_ + ": duplicate constructor " + c.name);
    }
    for (const auto& alias : c.aliases) {
      if (!seen.insert(alias).second) {
        throw DomainError(name_ + ": alias " + alias + " clashes");
      }
    }
    has_base = has_base || c.is_base();
  }
  if (!has_base) throw DomainError(name_ + ": no base constructor");
}

const ConstructorDef* InductiveDef::find(std::string_view token) const {
  for (const auto& c : constructors_) {
    if (c.name == token) return &c;
    if (std::find(c.aliases.begin(), c.aliases.end(), token) != c.aliases.end()) {
      return &c;
    }
  }
  return nullptr;
}

const ConstructorDef& InductiveDef::at(std::string_view token) const {
  if (const auto* c = find(token)) return *c;
  throw ParseError("unknown constructor '" + std::string(token) + "' for " + name_);
}

bool InductiveDef::is_unary_chain() const {
  return std::all_of(constructors_.begin(), constructors_.end(), [](const ConstructorDef& c) {
    return c.recursive_arity <= 1 && c.payload_kinds.empty();
  });
}

Tokens InductiveDef::vocabulary() const {
  Tokens out;
  for (const auto& c : constructors_) out.push_back(c.name);
  return out;
}

const InductiveDef& peano_def() {
  static const InductiveDef def("peano", {{"I", 0, {}, {}}, {"S", 1, {}, {}}});
  return def;
}

const InductiveDef& bin_pos_def() {
  static const InductiveDef def("bin_pos",
                                {{"01", 0, {}, {}}, {"X0", 1, {}, {"XO"}}, {"X1", 1, {}, {}}});
  return def;
}

const InductiveDef& char_tree_def() {
  static const InductiveDef def("char_tree",
                                {{"Leaf", 0, {}, {}}, {"Branch", 2, {PayloadKind::Char}, {}}});
  return def;
}

std::vector<const InductiveDef*> builtin_defs() {
  return {&peano_def(), &bin_pos_def(), &char_tree_def()};
}

namespace {

bool is_structural(std::string_view tok) {
  return tok == kOpenParen || tok == kCloseParen || tok == kLeafToken || tok == "]" ||
         tok == "[";
}

void check_payload(PayloadKind kind, const Token& value) {
  switch (kind) {
    case PayloadKind::Char:
      if (value.size() != 1 || is_structural(value) || value == " ") {
        throw DomainError("payload '" + value + "' is not a single character");
      }
      return;
  }
}

}  // namespace

Term::Term(const InductiveDef& def, std::string_view constructor, Tokens payloads,
           std::vector<Term> children) {
  const ConstructorDef& ctor = def.at(constructor);
  if (children.size() != ctor.recursive_arity) {
    throw DomainError(ctor.name + " expects " + std::to_string(ctor.recursive_arity) +
                      " children, got " + std::to_string(children.size()));
  }
  if (payloads.size() != ctor.payload_kinds.size()) {
    throw DomainError(ctor.name + " expects " + std::to_string(ctor.payload_kinds.size()) +
                      " payloads, got " + std::to_string(payloads.size()));
  }
  for (std::size_t i = 0; i < payloads.size(); ++i) check_payload(ctor.payload_kinds[i], payloads[i]);
  std::size_t size = 1;
  std::size_t weight = 1 + payloads.size();
  for (const auto& c : children) {
    if (&c.type() != &def) throw DomainError("child of " + ctor.name + " has type " + c.type().name());
    size += c.node_count();
    weight += c.token_count();
  }
  node_ = std::make_shared<const Node>(
      Node{&def, &ctor, std::move(payloads), std::move(children), size, weight});
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.node_->ctor != b.node_->ctor || a.node_->size != b.node_->size) return false;
  return a.node_->payloads == b.node_->payloads && a.node_->children == b.node_->children;
}

std::string_view to_string(SeqOrder order) {
  switch (order) {
    case SeqOrder::constructor_reverse: return "reverse";
    case SeqOrder::natural: return "natural";
    case SeqOrder::tree_appendix: return "tree";
  }
  return "?";
}

SeqOrder parse_order(std::string_view text) {
  if (text == "reverse" || text == "constructor") return SeqOrder::constructor_reverse;
  if (text == "natural") return SeqOrder::natural;
  if (text == "tree") return SeqOrder::tree_appendix;
  throw DomainError("unknown order '" + std::string(text) + "'");
}

namespace {

void linearize_into(const Term& t, Tokens& out) {
  out.push_back(t.constructor());
  for (const auto& p : t.payloads()) out.push_back(p);
  for (const auto& c : t.children()) linearize_into(c, out);
}

Term delinearize_at(std::span<const Token> tokens, std::size_t& pos, const InductiveDef& def) {
  if (pos >= tokens.size()) {
    throw ParseError("dangling inductive case: sequence ends where a " + def.name() +
                     " was expected");
  }
  const ConstructorDef* ctor = def.find(tokens[pos]);
  if (ctor == nullptr) {
    throw ParseError("unknown token '" + tokens[pos] + "' at position " + std::to_string(pos));
  }
  ++pos;
  Tokens payloads;
  for (std::size_t i = 0; i < ctor->payload_kinds.size(); ++i) {
    if (pos >= tokens.size()) throw ParseError("missing payload for " + ctor->name);
    payloads.push_back(tokens[pos++]);
  }
  std::vector<Term> children;
  children.reserve(ctor->recursive_arity);
  for (std::size_t i = 0; i < ctor->recursive_arity; ++i) {
    children.push_back(delinearize_at(tokens, pos, def));
  }
  return Term(def, ctor->name, std::move(payloads), std::move(children));
}

}  // namespace

TokenSeq linearize(const Term& term) {
  TokenSeq seq;
  seq.tokens.reserve(term.node_count());
  linearize_into(term, seq.tokens);
  return seq;
}

Term delinearize(std::span<const Token> tokens, const InductiveDef& def) {
  std::size_t pos = 0;
  Term t = delinearize_at(tokens, pos, def);
  if (pos != tokens.size()) {
    throw ParseError("trailing tokens after position " + std::to_string(pos));
  }
  return t;
}

TokenSeq reorder(const TokenSeq& seq, SeqOrder target) {
  if (seq.order == SeqOrder::tree_appendix || target == SeqOrder::tree_appendix) {
    throw DomainError("tree sequences have no natural/reverse order");
  }
  TokenSeq out = seq;
  if (seq.order != target) {
    std::reverse(out.tokens.begin(), out.tokens.end());
    out.order = target;
  }
  return out;
}

Term bin_encode(std::uint64_t n) {
  if (n == 0) throw DomainError("bin_pos has no zero");
  const auto& def = bin_pos_def();
  const std::size_t bits = bit_length(n);
  Term t(def, "01");
  // Build from the most significant digit below the leading one down to the LSB.
  for (std::size_t i = bits - 1; i-- > 0;) {
    t = Term(def, ((n >> i) & 1U) != 0 ? "X1" : "X0", {}, {t});
  }
  return t;
}

std::uint64_t bin_value(const Term& term) {
  if (&term.type() != &bin_pos_def()) throw DomainError("not a bin_pos term");
  // Collect the chain, then fold from the base upwards.
  std::vector<const Term*> chain;
  for (const Term* t = &term; !t->is_base(); t = &t->child(0)) chain.push_back(t);
  std::uint64_t v = 1;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    if (v >> 63) throw DomainError("bin_pos value exceeds 64 bits");
    v = 2 * v + ((*it)->constructor() == "X1" ? 1 : 0);
  }
  return v;
}

std::size_t bit_length(std::uint64_t n) {
  std::size_t bits = 0;
  for (; n != 0; n >>= 1) ++bits;
  return bits;
}

std::size_t trailing_x1_count(std::uint64_t n) {
  if (n == 0) throw DomainError("bin_pos has no zero");
  std::size_t count = 0;
  for (std::size_t i = 0; i + 1 < bit_length(n) && ((n >> i) & 1U) != 0; ++i) ++count;
  return count;
}

Term peano_encode(std::uint64_t n) {
  if (n == 0) throw DomainError("peano has no zero");
  Term t(peano_def(), "I");
  for (std::uint64_t i = 1; i < n; ++i) t = Term(peano_def(), "S", {}, {t});
  return t;
}

std::uint64_t peano_value(const Term& term) {
  if (&term.type() != &peano_def()) throw DomainError("not a peano term");
  return term.node_count();
}

Term leaf() {
  static const Term l(char_tree_def(), "Leaf");
  return l;
}

Term branch(std::string_view value, Term left, Term right) {
  return Term(char_tree_def(), "Branch", {Token(value)}, {std::move(left), std::move(right)});
}

std::size_t tree_depth(const Term& tree) {
  if (tree.is_base()) return 0;
  std::size_t d = 0;
  for (const auto& c : tree.children()) d = std::max(d, tree_depth(c));
  return d + 1;
}

namespace {

void serialize_into(const Term& t, Tokens& out) {
  out.push_back(t.payloads()[0]);
  for (const auto& c : t.children()) {
    if (c.is_base()) {
      out.emplace_back(kLeafToken);
    } else {
      out.emplace_back(kOpenParen);
      serialize_into(c, out);
      out.emplace_back(kCloseParen);
    }
  }
}

Term parse_node(std::span<const Token> tokens, std::size_t& pos);

Term parse_branch(std::span<const Token> tokens, std::size_t& pos) {
  if (pos >= tokens.size()) throw ParseError("missing branch at end of input");
  const Token& tok = tokens[pos];
  if (tok == kLeafToken) {
    ++pos;
    return leaf();
  }
  if (tok != kOpenParen) {
    throw ParseError("expected LEAF or '(' at position " + std::to_string(pos) + ", got '" + tok +
                     "'");
  }
  ++pos;
  Term inner = parse_node(tokens, pos);
  if (pos >= tokens.size()) throw ParseError("unbalanced parentheses: missing ')'");
  if (tokens[pos] != kCloseParen) {
    throw ParseError("expected ')' at position " + std::to_string(pos) + ", got '" + tokens[pos] +
                     "'");
  }
  ++pos;
  return inner;
}

Term parse_node(std::span<const Token> tokens, std::size_t& pos) {
  if (pos >= tokens.size()) throw ParseError("missing node value at end of input");
  const Token& value = tokens[pos];
  if (is_structural(value)) {
    throw ParseError("expected node value at position " + std::to_string(pos) + ", got '" +
                     value + "'");
  }
  ++pos;
  Term left = parse_branch(tokens, pos);
  Term right = parse_branch(tokens, pos);
  return branch(value, std::move(left), std::move(right));
}

}  // namespace

TokenSeq tree_serialize(const Term& tree) {
  if (&tree.type() != &char_tree_def()) throw DomainError("not a char_tree term");
  TokenSeq seq{{}, SeqOrder::tree_appendix};
  if (!tree.is_base()) {
    seq.tokens.reserve(3 * tree.node_count());
    serialize_into(tree, seq.tokens);
  }
  return seq;
}

Term tree_parse(std::span<const Token> tokens) {
  if (tokens.empty()) return leaf();
  std::size_t pos = 0;
  Term t = parse_node(tokens, pos);
  if (pos != tokens.size()) {
    if (tokens[pos] == kCloseParen) throw ParseError("unbalanced parentheses: stray ')'");
    throw ParseError("trailing tokens after position " + std::to_string(pos));
  }
  return t;
}

VocabRemap::VocabRemap(std::map<Token, Token> mapping) : mapping_(std::move(mapping)) {
  std::set<Token> image;
  for (const auto& [from, to] : mapping_) {
    if (!image.insert(to).second) throw DomainError("remap is not injective: '" + to + "'");
  }
}

VocabRemap VocabRemap::identity(std::span<const Token> vocabulary) {
  std::map<Token, Token> m;
  for (const auto& t : vocabulary) m.emplace(t, t);
  return VocabRemap(std::move(m));
}

VocabRemap VocabRemap::parse(std::string_view spec) {
  std::map<Token, Token> m;
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t end = spec.find(',', start);
    if (end == std::string_view::npos) end = spec.size();
    std::string_view pair = spec.substr(start, end - start);
    if (!pair.empty()) {
      std::size_t eq = pair.find('=');
      if (eq == std::string_view::npos || eq == 0 || eq + 1 == pair.size()) {
        throw ParseError("bad remap entry '" + std::string(pair) + "'");
      }
      if (!m.emplace(Token(pair.substr(0, eq)), Token(pair.substr(eq + 1))).second) {
        throw DomainError("remap key repeated: " + std::string(pair.substr(0, eq)));
      }
    }
    start = end + 1;
  }
  return VocabRemap(std::move(m));
}

VocabRemap VocabRemap::inverse() const {
  std::map<Token, Token> m;
  for (const auto& [from, to] : mapping_) m.emplace(to, from);
  return VocabRemap(std::move(m));
}

std::string VocabRemap::to_string() const {
  std::string out;
  for (const auto& [from, to] : mapping_) {
    if (!out.empty()) out += ',';
    out += from + "=" + to;
  }
  return out;
}

Tokens remap_tokens(std::span<const Token> tokens, const VocabRemap& sigma) {
  Tokens out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto it = sigma.mapping().find(t);
    if (it == sigma.mapping().end()) throw DomainError("token '" + t + "' outside remap domain");
    out.push_back(it->second);
  }
  return out;
}

Tokens split_tokens(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join_tokens(std::span<const Token> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace structrec
