#include "structrec/trace_format.hpp"

namespace structrec {

std::string_view to_string(TraceStyle style) {
  switch (style) {
    case TraceStyle::paren: return "paren";
    case TraceStyle::arrow: return "arrow";
    case TraceStyle::term: return "term";
  }
  return "?";
}

TraceStyle parse_trace_style(std::string_view text) {
  if (text == "paren") return TraceStyle::paren;
  if (text == "arrow") return TraceStyle::arrow;
  if (text == "term") return TraceStyle::term;
  throw DomainError("unknown trace style '" + std::string(text) + "'");
}

Tokens render_paren(const Expr& state) {
  Tokens out;
  const Expr* e = &state;
  while (e->kind() == Expr::Kind::Ctor) {
    if (e->children().size() != 1 || !e->tokens().empty()) {
      throw DomainError("paren style needs a unary chain, got " + state.to_string());
    }
    out.push_back(e->name());
    e = &e->child(0);
  }
  if (e->is_value()) {
    if (!e->term().type().is_unary_chain()) {
      throw DomainError("paren style needs a unary chain, got " + state.to_string());
    }
    for (auto& t : linearize(e->term()).tokens) out.push_back(std::move(t));
    return out;
  }
  if (e->kind() != Expr::Kind::Call || e->children().size() != 1 || !e->child(0).is_value() ||
      !e->child(0).term().type().is_unary_chain()) {
    throw DomainError("paren style needs one pending single-argument call, got " +
                      state.to_string());
  }
  out.emplace_back(kOpenParen);
  for (auto& t : linearize(e->child(0).term()).tokens) out.push_back(std::move(t));
  out.emplace_back(kCloseParen);
  return out;
}

Expr parse_paren(std::span<const Token> tokens, std::string_view program,
                 const InductiveDef& def) {
  std::size_t open = tokens.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == kOpenParen) {
      if (open != tokens.size()) throw ParseError("more than one '(' in state");
      open = i;
    } else if (tokens[i] == kCloseParen && (open == tokens.size() || i + 1 != tokens.size())) {
      throw ParseError("')' must close the pending argument at the end of the state");
    }
  }
  if (open == tokens.size()) {
    if (tokens.empty()) throw ParseError("empty state");
    return Expr::value(delinearize(tokens, def));
  }
  if (tokens.back() != kCloseParen) throw ParseError("unbalanced parentheses: missing ')'");
  auto inner = tokens.subspan(open + 1, tokens.size() - open - 2);
  if (inner.empty()) throw ParseError("empty pending argument");
  Expr e = Expr::call(std::string(program), {Expr::value(delinearize(inner, def))});
  for (std::size_t i = open; i-- > 0;) {
    const ConstructorDef* c = def.find(tokens[i]);
    if (c == nullptr || c->recursive_arity != 1) {
      throw ParseError("prefix token '" + tokens[i] + "' is not a unary constructor");
    }
    e = Expr::ctor(def, c->name, {}, {std::move(e)});
  }
  return e;
}

namespace {

void unroll_into(const Expr& e, Tokens& out) {
  switch (e.kind()) {
    case Expr::Kind::List:
      out.insert(out.end(), e.tokens().begin(), e.tokens().end());
      return;
    case Expr::Kind::Concat:
      unroll_into(e.child(0), out);
      unroll_into(e.child(1), out);
      return;
    case Expr::Kind::Call:
      if (e.children().size() == 1 && e.child(0).is_value() &&
          &e.child(0).term().type() == &char_tree_def()) {
        const Term& t = e.child(0).term();
        if (t.is_base()) {
          out.emplace_back(kEmptyToken);
        } else {
          out.emplace_back(kUnrollOpen);
          for (auto& tok : tree_serialize(t).tokens) out.push_back(std::move(tok));
          out.emplace_back(kUnrollClose);
        }
        return;
      }
      break;
    default: break;
  }
  throw DomainError("not a traversal state: " + e.to_string());
}

bool is_unroll_open(std::string_view tok) {
  return tok == kUnrollOpen || tok == "REDUCE" || tok == "REDUCE[";
}

}  // namespace

Tokens render_unroll(const Expr& state) {
  Tokens out;
  unroll_into(state, out);
  return out;
}

Expr parse_unroll(std::span<const Token> tokens, std::string_view program) {
  std::vector<Expr> items;
  Tokens pending_values;
  auto flush = [&] {
    if (!pending_values.empty()) items.push_back(Expr::list(std::exchange(pending_values, {})));
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& tok = tokens[i];
    if (is_unroll_open(tok)) {
      std::size_t close = i + 1;
      while (close < tokens.size() && tokens[close] != kUnrollClose) {
        if (is_unroll_open(tokens[close])) throw ParseError("nested UNROLL[");
        ++close;
      }
      if (close == tokens.size()) throw ParseError("UNROLL[ without matching ]");
      if (close == i + 1) throw ParseError("empty UNROLL[ ]; a pending leaf is EMPTY");
      flush();
      Term t = tree_parse(tokens.subspan(i + 1, close - i - 1));
      items.push_back(Expr::call(std::string(program), {Expr::value(std::move(t))}));
      i = close;
    } else if (tok == kEmptyToken) {
      flush();
      items.push_back(Expr::call(std::string(program), {Expr::value(leaf())}));
    } else if (tok == kUnrollClose || tok == kOpenParen || tok == kCloseParen || tok == kLeafToken) {
      throw ParseError("structural token '" + tok + "' outside UNROLL[ ]");
    } else {
      pending_values.push_back(tok);
    }
  }
  flush();
  if (items.empty()) return Expr::list({});
  Expr e = std::move(items.back());
  for (std::size_t i = items.size() - 1; i-- > 0;) e = Expr::concat(std::move(items[i]), std::move(e));
  return e;
}

std::string render_state(const Expr& state, TraceStyle style) {
  switch (style) {
    case TraceStyle::paren: return join_tokens(render_paren(state));
    case TraceStyle::arrow: return join_tokens(render_unroll(state));
    case TraceStyle::term: return state.to_string();
  }
  return {};
}

std::string render_states(std::span<const Expr> states, TraceStyle style) {
  const std::string sep = style == TraceStyle::paren ? " = " : " -> ";
  std::string out;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (i > 0) out += sep;
    out += render_state(states[i], style);
  }
  return out;
}

std::string render_trace(const Trace& trace, TraceStyle style) {
  auto states = trace.states();
  return render_states(states, style);
}

Tokens split_trace_tokens(std::string_view text) {
  Tokens out;
  for (auto& raw : split_tokens(text)) {
    std::string cur;
    for (char ch : raw) {
      if (ch == '(' || ch == ')') {
        if (!cur.empty()) out.push_back(std::exchange(cur, {}));
        out.emplace_back(1, ch);
      } else {
        cur.push_back(ch);
      }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
  }
  return out;
}

std::vector<Tokens> split_trace_states(std::string_view text, TraceStyle style) {
  const std::string_view sep = style == TraceStyle::paren ? kParenSeparator : kArrowSeparator;
  std::vector<Tokens> states(1);
  for (auto& tok : split_trace_tokens(text)) {
    if (tok == sep) {
      states.emplace_back();
    } else {
      states.back().push_back(std::move(tok));
    }
  }
  return states;
}

}  // namespace structrec
