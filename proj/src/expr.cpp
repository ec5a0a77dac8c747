#include "structrec/expr.hpp"

#include <new>
#include <utility>

namespace structrec {

namespace {

// Reduction allocates and drops nodes at a high rate, all of one size.
// Recycling them through a per-thread free list avoids most malloc/free
// traffic. The list is capped so a burst does not pin memory forever.
struct FreeBlock {
  FreeBlock* next;
};

template <std::size_t Size>
struct BlockPool {
  static constexpr std::size_t kMaxCached = std::size_t{1} << 16;
  FreeBlock* head = nullptr;
  std::size_t cached = 0;

  ~BlockPool() {
    while (head != nullptr) ::operator delete(std::exchange(head, head->next));
  }
  void* take() {
    if (head == nullptr) return ::operator new(Size);
    --cached;
    return std::exchange(head, head->next);
  }
  void give(void* p) {
    if (cached == kMaxCached) {
      ::operator delete(p);
      return;
    }
    ++cached;
    head = new (p) FreeBlock{head};
  }
  static BlockPool& local() {
    thread_local BlockPool pool;
    return pool;
  }
};

template <class T>
struct PoolAllocator {
  static_assert(sizeof(T) >= sizeof(FreeBlock));
  using value_type = T;

  PoolAllocator() = default;
  template <class U>
  PoolAllocator(const PoolAllocator<U>&) {}

  T* allocate(std::size_t n) {
    if (n != 1) return static_cast<T*>(::operator new(n * sizeof(T)));
    return static_cast<T*>(BlockPool<sizeof(T)>::local().take());
  }
  void deallocate(T* p, std::size_t n) {
    if (n != 1) {
      ::operator delete(p);
      return;
    }
    BlockPool<sizeof(T)>::local().give(p);
  }
  template <class U>
  bool operator==(const PoolAllocator<U>&) const {
    return true;
  }
};

std::shared_ptr<ExprNode> make_node(Expr::Kind kind, bool normal, std::size_t weight) {
  auto node = std::allocate_shared<ExprNode>(PoolAllocator<ExprNode>{});
  node->kind = kind;
  node->normal = normal;
  node->tokens_weight = weight;
  return node;
}

}  // namespace

Expr Expr::value(Term t) {
  auto node = make_node(Kind::Value, true, t.token_count());
  node->def = &t.type();
  node->term = std::move(t);
  return Expr(std::move(node));
}

Expr Expr::ctor(const InductiveDef& def, std::string_view constructor, Tokens payloads,
                ExprList children) {
  bool all_values = true;
  for (const auto& c : children) all_values = all_values && c.is_value();
  if (all_values) {
    std::vector<Term> terms;
    terms.reserve(children.size());
    for (const auto& c : children) terms.push_back(c.term());
    return value(Term(def, constructor, std::move(payloads), std::move(terms)));
  }
  const ConstructorDef& cd = def.at(constructor);
  if (children.size() != cd.recursive_arity || payloads.size() != cd.payload_kinds.size()) {
    throw DomainError("arity mismatch building " + cd.name);
  }
  std::size_t w = 1 + payloads.size();
  for (const auto& c : children) w += c.token_count();
  auto node = make_node(Kind::Ctor, false, w);
  node->name = cd.name;
  node->def = &def;
  node->tokens = std::move(payloads);
  node->children = std::move(children);
  return Expr(std::move(node));
}

Expr Expr::call(std::string function, ExprList args) {
  std::size_t w = 1;
  for (const auto& a : args) w += a.token_count();
  auto node = make_node(Kind::Call, false, w);
  node->name = std::move(function);
  node->children = std::move(args);
  return Expr(std::move(node));
}

Expr Expr::list(Tokens items) {
  auto node = make_node(Kind::List, true, items.size());
  node->tokens = std::move(items);
  return Expr(std::move(node));
}

Expr Expr::concat(Expr left, Expr right) {
  auto node = make_node(Kind::Concat, false, left.token_count() + right.token_count());
  node->children.push_back(std::move(left));
  node->children.push_back(std::move(right));
  return Expr(std::move(node));
}

Expr Expr::var(std::string name) {
  auto node = make_node(Kind::Var, false, 1);
  node->name = std::move(name);
  return Expr(std::move(node));
}

const Term& Expr::term() const {
  if (kind() != Kind::Value) throw DomainError("expression is not a value");
  return *node_->term;
}

const std::string& Expr::name() const { return node_->name; }

const InductiveDef& Expr::ctor_type() const {
  if (kind() != Kind::Ctor) throw DomainError("expression is not a constructor node");
  return *node_->def;
}

std::span<const Token> Expr::tokens() const { return node_->tokens; }

std::span<const Expr> Expr::children() const {
  return {node_->children.data(), node_->children.size()};
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.kind != y.kind || x.tokens_weight != y.tokens_weight) return false;
  switch (x.kind) {
    case Expr::Kind::Value: return *x.term == *y.term;
    case Expr::Kind::List: return x.tokens == y.tokens;
    case Expr::Kind::Var: return x.name == y.name;
    case Expr::Kind::Ctor:
      return x.def == y.def && x.name == y.name && x.tokens == y.tokens && x.children == y.children;
    case Expr::Kind::Call: return x.name == y.name && x.children == y.children;
    case Expr::Kind::Concat: return x.children == y.children;
  }
  return false;
}

namespace {

std::string term_text(const Term& t);

std::string wrap_term(const Term& t) {
  std::string s = term_text(t);
  return t.children().empty() && t.payloads().empty() ? s : "(" + s + ")";
}

std::string term_text(const Term& t) {
  std::string out = t.constructor();
  for (const auto& p : t.payloads()) out += " " + p;
  for (const auto& c : t.children()) out += " " + wrap_term(c);
  return out;
}

bool atomic(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Value: return e.term().children().empty() && e.term().payloads().empty();
    case Expr::Kind::List:
    case Expr::Kind::Var: return true;
    default: return false;
  }
}

}  // namespace

std::string Expr::to_string() const {
  auto wrapped = [](const Expr& e) {
    return atomic(e) ? e.to_string() : "(" + e.to_string() + ")";
  };
  switch (kind()) {
    case Kind::Value: return term_text(term());
    case Kind::Var: return name();
    case Kind::List: {
      std::string out = "[";
      for (std::size_t i = 0; i < tokens().size(); ++i) {
        if (i > 0) out += "; ";
        out += tokens()[i];
      }
      return out + "]";
    }
    case Kind::Ctor:
    case Kind::Call: {
      std::string out = name();
      for (const auto& p : tokens()) out += " " + p;
      for (const auto& c : children()) out += " " + wrapped(c);
      return out;
    }
    case Kind::Concat: {
      const Expr& l = child(0);
      const Expr& r = child(1);
      std::string left = l.kind() == Kind::List ? l.to_string() : "(" + l.to_string() + ")";
      std::string right = r.kind() == Kind::List || r.kind() == Kind::Concat
                              ? r.to_string()
                              : "(" + r.to_string() + ")";
      return left + " ++ " + right;
    }
  }
  return {};
}

}  // namespace structrec
