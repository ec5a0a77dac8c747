#pragma once

// Surface forms of reduction states and traces.
//
// Paren form (unary chains such as bin_pos under `s`): the emitted prefix,
// then the pending argument wrapped in "( ... )". A final state has no
// parens. States are joined by " = ":
//   ( X1 X0 01 ) = X0 ( X0 01 ) = X0 X1 01
//
// Unroll form (tree traversals): emitted values bare, a pending call on a
// Branch subtree as "UNROLL[ <tree tokens> ]", a pending call on a Leaf as
// "EMPTY", all in left-to-right concatenation order. States are joined by
// " -> ".

#include <string>
#include <string_view>
#include <vector>

#include "structrec/reduction.hpp"

namespace structrec {

inline constexpr std::string_view kUnrollOpen = "UNROLL[";
inline constexpr std::string_view kUnrollClose = "]";
inline constexpr std::string_view kEmptyToken = "EMPTY";
inline constexpr std::string_view kParenSeparator = "=";
inline constexpr std::string_view kArrowSeparator = "->";

enum class TraceStyle { paren, arrow, term };

std::string_view to_string(TraceStyle style);
TraceStyle parse_trace_style(std::string_view text);

// Throws DomainError when the state is not a unary chain over at most one
// pending single-argument call.
Tokens render_paren(const Expr& state);
// Inverse of render_paren for `program` over `def`. Throws ParseError.
Expr parse_paren(std::span<const Token> tokens, std::string_view program, const InductiveDef& def);

// Throws DomainError on states that are not traversal states.
Tokens render_unroll(const Expr& state);
// Accepts REDUCE / REDUCE[ as aliases of UNROLL[. Throws ParseError.
Expr parse_unroll(std::span<const Token> tokens, std::string_view program);

std::string render_state(const Expr& state, TraceStyle style);
std::string render_trace(const Trace& trace, TraceStyle style);
std::string render_states(std::span<const Expr> states, TraceStyle style);

// Whitespace split that also detaches '(' and ')' glued to neighbours,
// so "(X1 01)" reads as "( X1 01 )".
Tokens split_trace_tokens(std::string_view text);

// Splits a trace line into per-state token lists at the style's separator.
std::vector<Tokens> split_trace_states(std::string_view text, TraceStyle style);

}  // namespace structrec
