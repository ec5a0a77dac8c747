#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "structrec/term.hpp"

namespace structrec {

class Expr;
struct ExprNode;
// Child lists stay inline up to two entries (every builtin node shape).
using ExprList = boost::container::small_vector<Expr, 2>;

// State of a reduction: a Term extended with pending calls, list literals
// and concatenation. Immutable; copies share structure.
//
//   Value   a fully evaluated Term
//   Ctor    constructor applied to children of which at least one is pending
//   Call    named program applied to argument expressions
//   List    literal list of payload tokens
//   Concat  left ++ right (both list valued)
//   Var     template variable, only inside program clause bodies
class Expr {
 public:
  enum class Kind : std::uint8_t { Value, Ctor, Call, List, Concat, Var };

  static Expr value(Term t);
  // Collapses to a Value when every child is a Value.
  static Expr ctor(const InductiveDef& def, std::string_view constructor, Tokens payloads,
                   ExprList children);
  static Expr call(std::string function, ExprList args);
  static Expr list(Tokens items);
  static Expr concat(Expr left, Expr right);
  static Expr var(std::string name);

  Kind kind() const;
  bool is_value() const { return kind() == Kind::Value; }
  bool is_list() const { return kind() == Kind::List; }
  // No Call, Concat or Var anywhere below.
  bool is_normal() const;

  const Term& term() const;                // Value
  const std::string& name() const;         // Ctor constructor, Call function, Var name
  const InductiveDef& ctor_type() const;   // Ctor
  std::span<const Token> tokens() const;   // Ctor payloads, List items
  std::span<const Expr> children() const;  // Ctor children, Call args, Concat operands
  const Expr& child(std::size_t i) const;

  // Token count of the linearized form (Values and Lists count their atoms).
  std::size_t token_count() const;

  // Coq-like display: "add (S I) I", "(inorder l) ++ [a] ++ (inorder r)".
  std::string to_string() const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const ExprNode> node_;
};

struct ExprNode {
  Expr::Kind kind = Expr::Kind::Value;
  bool normal = true;
  std::size_t tokens_weight = 0;
  std::string name;
  const InductiveDef* def = nullptr;
  std::optional<Term> term;
  Tokens tokens;
  ExprList children;
};

inline Expr::Kind Expr::kind() const { return node_->kind; }
inline bool Expr::is_normal() const { return node_->normal; }
inline const Expr& Expr::child(std::size_t i) const { return node_->children.at(i); }
inline std::size_t Expr::token_count() const { return node_->tokens_weight; }

// Child-index path from the root of an Expr to a redex.
using ExprPath = std::vector<std::uint32_t>;

}  // namespace structrec
