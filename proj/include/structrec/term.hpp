#pragma once

// Inductive datatypes, their values, and every token-level serialization
// used by the datasets: constructor (reverse) order, natural order, the
// parenthesized tree format, and vocabulary remapping.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "structrec/errors.hpp"

namespace structrec {

using Token = std::string;
using Tokens = std::vector<Token>;

// Structural tokens of the tree format.
inline constexpr std::string_view kOpenParen = "(";
inline constexpr std::string_view kCloseParen = ")";
inline constexpr std::string_view kLeafToken = "LEAF";

enum class PayloadKind { Char };

struct ConstructorDef {
  Token name;
  std::size_t recursive_arity = 0;
  std::vector<PayloadKind> payload_kinds;
  // Alternate spellings accepted when reading tokens (e.g. XO for X0).
  std::vector<Token> aliases;

  bool is_base() const { return recursive_arity == 0; }
};

class InductiveDef {
 public:
  // Throws DomainError when names clash or no base constructor exists.
  InductiveDef(std::string name, std::vector<ConstructorDef> constructors);

  const std::string& name() const { return name_; }
  std::span<const ConstructorDef> constructors() const { return constructors_; }

  // Resolves aliases; nullptr when the token names no constructor.
  const ConstructorDef* find(std::string_view token) const;
  const ConstructorDef& at(std::string_view token) const;

  // True when every constructor has at most one child and no payload, i.e.
  // values are chains and have a natural-order reading.
  bool is_unary_chain() const;

  // Canonical constructor spellings, in declaration order.
  Tokens vocabulary() const;

 private:
  std::string name_;
  std::vector<ConstructorDef> constructors_;
};

// peano(I, S), bin_pos(01, X0, X1), char_tree(Leaf, Branch).
const InductiveDef& peano_def();
const InductiveDef& bin_pos_def();
const InductiveDef& char_tree_def();
std::vector<const InductiveDef*> builtin_defs();

// An immutable value of an inductive type. Copies share structure.
class Term {
 public:
  // Validates arity and payload kinds; canonicalizes aliased constructor names.
  Term(const InductiveDef& def, std::string_view constructor, Tokens payloads = {},
       std::vector<Term> children = {});

  const InductiveDef& type() const { return *node_->def; }
  const ConstructorDef& constructor_def() const { return *node_->ctor; }
  const Token& constructor() const { return node_->ctor->name; }
  std::span<const Token> payloads() const { return node_->payloads; }
  std::span<const Term> children() const { return node_->children; }
  const Term& child(std::size_t i) const { return node_->children.at(i); }

  bool is_base() const { return node_->ctor->is_base(); }
  std::size_t node_count() const { return node_->size; }
  // Length of linearize(*this).
  std::size_t token_count() const { return node_->weight; }

  friend bool operator==(const Term& a, const Term& b);

 private:
  struct Node {
    const InductiveDef* def;
    const ConstructorDef* ctor;
    Tokens payloads;
    std::vector<Term> children;
    std::size_t size;
    std::size_t weight;
  };
  std::shared_ptr<const Node> node_;
};

enum class SeqOrder { constructor_reverse, natural, tree_appendix };

std::string_view to_string(SeqOrder order);
SeqOrder parse_order(std::string_view text);

struct TokenSeq {
  Tokens tokens;
  SeqOrder order = SeqOrder::constructor_reverse;

  friend bool operator==(const TokenSeq&, const TokenSeq&) = default;
};

// Flat preorder of constructor tokens, outermost first; payloads follow
// their constructor.
TokenSeq linearize(const Term& term);

// Inverse of linearize. Throws ParseError on unknown tokens, dangling
// inductive cases, or trailing tokens.
Term delinearize(std::span<const Token> tokens, const InductiveDef& def);

// Converts between constructor_reverse and natural order (exact reversal).
// Throws DomainError for the tree format.
TokenSeq reorder(const TokenSeq& seq, SeqOrder target);

// Positive binary numbers. bin_value throws DomainError past 64 bits.
Term bin_encode(std::uint64_t n);
std::uint64_t bin_value(const Term& term);
// Number of binary digits of n (n >= 1).
std::size_t bit_length(std::uint64_t n);
// One-bits directly below the most significant bit, i.e. the number of
// leading X1 constructors of bin_encode(n).
std::size_t trailing_x1_count(std::uint64_t n);

Term peano_encode(std::uint64_t n);
std::uint64_t peano_value(const Term& term);

// char_tree helpers.
Term leaf();
Term branch(std::string_view value, Term left, Term right);
// Branch levels: Leaf = 0, Branch with two Leaf children = 1.
std::size_t tree_depth(const Term& tree);

// node ::= value branch branch ; branch ::= LEAF | ( node ).
// A bare Leaf serializes to the empty sequence.
TokenSeq tree_serialize(const Term& tree);
Term tree_parse(std::span<const Token> tokens);

// Bijective token substitution.
class VocabRemap {
 public:
  VocabRemap() = default;
  // Throws DomainError if two keys map to the same token.
  explicit VocabRemap(std::map<Token, Token> mapping);

  static VocabRemap identity(std::span<const Token> vocabulary);
  // Parses "X0=a,X1=b,01=c".
  static VocabRemap parse(std::string_view spec);

  VocabRemap inverse() const;
  const std::map<Token, Token>& mapping() const { return mapping_; }
  bool empty() const { return mapping_.empty(); }
  std::string to_string() const;

 private:
  std::map<Token, Token> mapping_;
};

// Throws DomainError on a token outside the remap's domain.
Tokens remap_tokens(std::span<const Token> tokens, const VocabRemap& sigma);

// Canonical text form: atoms separated by single spaces.
Tokens split_tokens(std::string_view text);
std::string join_tokens(std::span<const Token> tokens);

}  // namespace structrec
