#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace racetune {

/// Error raised while reading a parameter file or a condition.
/// `line` and `column` are 1-based; zero means "not applicable".
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

enum class CompareOp { eq, ne, lt, le, gt, ge };

/// A leaf of a condition: a parameter reference or a literal.
struct Operand {
  enum class Kind { parameter, number, string };
  Kind kind = Kind::number;
  std::string text;           // parameter name or string literal contents
  double number = 0.0;        // numeric literal
  std::size_t index = 0;      // resolved parameter index (Kind::parameter)

  friend bool operator==(const Operand& a, const Operand& b) {
    return a.kind == b.kind && a.text == b.text && a.number == b.number;
  }
};

struct ConditionNode {
  enum class Kind { compare, member, all_of, any_of, negate };
  Kind kind = Kind::compare;
  CompareOp op = CompareOp::eq;
  Operand lhs;
  Operand rhs;
  std::vector<Operand> set;            // member
  std::vector<ConditionNode> children; // all_of / any_of / negate

  friend bool operator==(const ConditionNode&, const ConditionNode&) = default;
};

/// Value of a parameter as seen by a condition.
struct ScalarView {
  enum class Kind { inactive, number, string };
  Kind kind = Kind::inactive;
  double number = 0.0;
  std::string_view text;
};

/// Boolean activation expression over other parameters of a space.
///
/// Grammar: comparisons (`== != < <= > >=`), membership `x in {v1, v2}`,
/// `and`/`or`/`not` (also `&& || !`), parentheses. Literals are numbers or
/// quoted strings; bare words on the right of a comparison or inside a
/// set are string literals when they do not name a parameter.
class ConditionExpr {
 public:
  static ConditionExpr parse(std::string_view text, std::size_t line = 0,
                             std::size_t column_offset = 0);

  /// Binds parameter references to indices. Bare words that do not name a
  /// parameter become string literals; `lookup` returns nullopt for those.
  void resolve(const std::function<std::optional<std::size_t>(const std::string&)>& lookup);

  /// Evaluates the expression. Any comparison touching an inactive
  /// parameter is false.
  bool evaluate(const std::function<ScalarView(std::size_t)>& value_of) const;

  /// Parameter indices the expression reads (after resolve()).
  std::vector<std::size_t> references() const;
  /// Parameter names the expression reads.
  std::vector<std::string> referenced_names() const;

  /// Canonical text; parse(to_string()) yields an equal expression.
  std::string to_string() const;

  const ConditionNode& root() const noexcept { return root_; }

  friend bool operator==(const ConditionExpr& a, const ConditionExpr& b) {
    return a.root_ == b.root_;
  }

 private:
  explicit ConditionExpr(ConditionNode root) : root_(std::move(root)) {}
  ConditionNode root_;
};

}  // namespace racetune
