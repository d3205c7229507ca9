#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace agim {

enum class Op { True, Pred, Not, And, Or, Eventually, Globally, Until };
enum class Cmp { Ge, Le };

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Immutable STL formula node. Build instances through the static factories;
/// once constructed they may be shared freely across threads.
class Formula {
 public:
  Op op() const { return op_; }

  // Predicate accessors (valid when op() == Op::Pred).
  const std::string& var() const { return var_; }
  Cmp cmp() const { return cmp_; }
  double threshold() const { return threshold_; }

  // Interval accessors (valid for temporal nodes).
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  const std::vector<FormulaPtr>& children() const { return children_; }
  const FormulaPtr& child(std::size_t i = 0) const { return children_.at(i); }
  std::size_t arity() const { return children_.size(); }

  static FormulaPtr truth();
  static FormulaPtr pred(std::string var, Cmp cmp, double threshold);
  static FormulaPtr negation(FormulaPtr f);
  /// n-ary conjunction/disjunction; arity >= 2, children kept in source order.
  static FormulaPtr conj(std::vector<FormulaPtr> children);
  static FormulaPtr disj(std::vector<FormulaPtr> children);
  static FormulaPtr eventually(double a, double b, FormulaPtr f);
  static FormulaPtr globally(double a, double b, FormulaPtr f);
  static FormulaPtr until(double a, double b, FormulaPtr lhs, FormulaPtr rhs);

  /// Structural equality (exact threshold/interval comparison).
  bool operator==(const Formula& other) const;

 private:
  Formula() = default;

  Op op_ = Op::True;
  std::string var_;
  Cmp cmp_ = Cmp::Ge;
  double threshold_ = 0.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
  std::vector<FormulaPtr> children_;
};

/// Parses the concrete syntax:
///
///   or    := and ('|' and)*
///   and   := until ('&' until)*
///   until := unary ('U' '[' num ',' num ']' until)?
///   unary := '!' unary | ('G'|'F') '[' num ',' num ']' unary
///          | '(' or ')' | 'true' | ident ('>='|'<=') num
///
/// Chains of '&' / '|' at the same level flatten into one n-ary node.
/// Intervals are in seconds and must satisfy 0 <= a <= b.
/// Throws SyntaxError or IntervalError.
FormulaPtr parse(std::string_view text);

/// Parses a UTF-8 formula file (conventionally *.stl).
FormulaPtr parse_file(const std::filesystem::path& path);

/// Canonical printer; parse(to_string(f)) reproduces f structurally.
std::string to_string(const Formula& f);
inline std::string to_string(const FormulaPtr& f) { return to_string(*f); }

/// Trace duration the formula needs beyond the evaluation instant:
/// 0 for predicates, b + horizon(child) for temporal nodes, max over children
/// for boolean connectives.
double horizon(const Formula& f);

/// Pre-order traversal including f itself.
std::vector<FormulaPtr> subformulae(const FormulaPtr& f);

bool contains_until(const Formula& f);

}  // namespace agim
