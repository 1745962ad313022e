#pragma once

#include "solbmc/word.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace solbmc::term {

enum class SortKind { Bool, BV, Addr, Event, Fn };

struct Sort {
  SortKind kind = SortKind::Bool;
  unsigned width = 0; // BV only

  static Sort boolean() { return {SortKind::Bool, 0}; }
  static Sort bv(unsigned w) { return {SortKind::BV, w}; }
  static Sort addr() { return {SortKind::Addr, 0}; }
  static Sort event() { return {SortKind::Event, 0}; }
  static Sort fn() { return {SortKind::Fn, 0}; }

  bool operator==(const Sort&) const = default;
};

/// Free inputs of transition and initial-state terms. The encoder replaces
/// them with per-step solver variables.
enum class InputKind {
  Slot,      // pre-state storage slot `index`
  Alive,
  EventTag,
  EventArg,  // index 0..3
  Balance,   // address ordinal `index`
  Blocktime,
  Value,     // msg.value
  Sender,    // msg.sender
  Time,      // the transaction's block time
  Arg,       // function parameter `index`
  CtorParam, // constructor parameter `index`
  Named,     // solver variable `name`
};

struct Input {
  InputKind kind = InputKind::Named;
  unsigned index = 0;
  std::string name;

  bool operator==(const Input&) const = default;
};

enum class Op {
  Const,
  Var,
  Not,
  And,
  Or,
  Implies,
  Ite,
  Eq,
  Add,
  Sub,
  Mul,
  Udiv,
  Urem,
  Neg,
  Ult,
  Ule,
  ZeroExt, // by `p0` bits
  Extract, // bits p0 (high) .. p1 (low)
};

struct Node;
using Term = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::Const;
  Sort sort;
  std::vector<Term> kids;
  Word value = 0; // Const: bool 0/1, bit-vector value, or ordinal for Addr/Event/Fn
  Input input;    // Var
  unsigned p0 = 0, p1 = 0;
  std::size_t hash = 0;

  bool is_const() const { return op == Op::Const; }
  bool is_true() const { return op == Op::Const && sort.kind == SortKind::Bool && value != 0; }
  bool is_false() const { return op == Op::Const && sort.kind == SortKind::Bool && value == 0; }
};

// Nodes are hash-consed: structurally equal terms are the same pointer.

Term mk_bool(bool b);
Term mk_bv(const Word& v, unsigned width); // v is reduced mod 2^width
Term mk_addr(unsigned ordinal);
Term mk_event(unsigned tag);
Term mk_fn(unsigned index);
Term mk_const(const Word& v, Sort sort);
Term mk_var(Input in, Sort sort);
Term mk_named(const std::string& name, Sort sort);

Term not_(const Term& a);
Term and_(std::vector<Term> xs);
Term and_(const Term& a, const Term& b);
Term or_(std::vector<Term> xs);
Term or_(const Term& a, const Term& b);
Term implies(const Term& a, const Term& b);
Term ite(const Term& c, const Term& a, const Term& b);
Term eq(const Term& a, const Term& b);
Term add(const Term& a, const Term& b);
Term sub(const Term& a, const Term& b);
Term mul(const Term& a, const Term& b);
Term udiv(const Term& a, const Term& b);
Term urem(const Term& a, const Term& b);
Term neg(const Term& a);
Term ult(const Term& a, const Term& b);
Term ule(const Term& a, const Term& b);
inline Term ugt(const Term& a, const Term& b) { return ult(b, a); }
inline Term uge(const Term& a, const Term& b) { return ule(b, a); }
Term zext(const Term& a, unsigned extra);
Term extract(const Term& a, unsigned hi, unsigned lo);

/// Replaces inputs for which `f` returns a term. Shared subterms are
/// rewritten once.
using Substitution = std::function<std::optional<Term>(const Input&, const Sort&)>;
Term substitute(const Term& t, const Substitution& f);

class Substituter {
public:
  explicit Substituter(Substitution f) : f_(std::move(f)) {}
  Term operator()(const Term& t);

private:
  Substitution f_;
  std::unordered_map<const Node*, Term> memo_;
};

/// Concrete evaluation; bools are 0/1, Addr/Event/Fn values are ordinals.
using Valuation = std::function<Word(const Input&, const Sort&)>;
Word eval(const Term& t, const Valuation& v);

class Evaluator {
public:
  explicit Evaluator(Valuation v) : v_(std::move(v)) {}
  Word operator()(const Term& t);

private:
  Valuation v_;
  std::unordered_map<const Node*, Word> memo_;
};

/// Inputs occurring in `t`, in first-occurrence order.
std::vector<std::pair<Input, Sort>> free_inputs(const Term& t);

std::size_t dag_size(const Term& t);

/// S-expression rendering. Inputs are printed through `name`.
std::string to_sexpr(const Term& t, const std::function<std::string(const Input&)>& name);

} // namespace solbmc::term
