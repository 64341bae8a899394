#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "racetune/condition.hpp"

namespace racetune {

enum class ParamKind { real, integer, categorical };
enum class Scale { linear, log };

/// Marker for a conditional parameter whose condition is false.
struct Inactive {
  friend constexpr auto operator<=>(Inactive, Inactive) = default;
};

/// Index into a categorical parameter's ordered value list.
struct Level {
  std::size_t index = 0;
  friend constexpr auto operator<=>(Level, Level) = default;
};

/// One parameter's assignment. Integers are stored as integral doubles.
using Value = std::variant<Inactive, double, Level>;

inline bool is_active(const Value& v) noexcept { return !std::holds_alternative<Inactive>(v); }

struct ParameterSpec {
  std::string name;
  ParamKind kind = ParamKind::real;
  double lower = 0.0;
  double upper = 1.0;
  std::vector<std::string> levels;  // categorical only
  Scale scale = Scale::linear;
  std::optional<ConditionExpr> condition;

  bool is_numeric() const noexcept { return kind != ParamKind::categorical; }
  bool is_conditional() const noexcept { return condition.has_value(); }
  double range() const noexcept { return upper - lower; }
  /// Number of distinct values the domain admits (integer and categorical).
  std::size_t cardinality() const noexcept;

  friend bool operator==(const ParameterSpec&, const ParameterSpec&) = default;
};

/// Validated, immutable, ordered collection of parameters.
///
/// Construction checks unique names, well-formed domains, condition
/// references, and acyclicity of the condition dependency graph.
class ParameterSpace {
 public:
  ParameterSpace() = default;
  explicit ParameterSpace(std::vector<ParameterSpec> params);

  std::size_t size() const noexcept { return params_.size(); }
  const ParameterSpec& operator[](std::size_t i) const { return params_[i]; }
  const std::vector<ParameterSpec>& params() const noexcept { return params_; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Index of `name`; throws std::out_of_range when absent.
  std::size_t at(std::string_view name) const;

  /// Parameters ordered so every condition only reads earlier entries.
  /// Ties keep declaration order.
  const std::vector<std::size_t>& evaluation_order() const noexcept { return order_; }

  /// Whether parameter `i` is active under `values` (INACTIVE references
  /// make the touching clause false).
  bool condition_holds(std::size_t i, std::span<const Value> values) const;

  friend bool operator==(const ParameterSpace& a, const ParameterSpace& b) {
    return a.params_ == b.params_;
  }

 private:
  std::vector<ParameterSpec> params_;
  std::vector<std::size_t> order_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

using ConfigId = std::uint64_t;

struct Origin {
  std::optional<ConfigId> parent;  // empty for uniformly sampled configurations
  int iteration = 1;

  friend bool operator==(const Origin&, const Origin&) = default;
};

struct Configuration {
  ConfigId id = 0;
  std::vector<Value> values;
  Origin origin;

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

struct Violation {
  enum class Kind { out_of_domain, not_integral, unknown_level, activation_mismatch, type_mismatch, arity };
  Kind kind;
  std::string parameter;
  std::string message;
};

ParameterSpace parse_parameter_file(std::string_view text);
ParameterSpace load_parameter_file(const std::string& path);
std::string to_parameter_file(const ParameterSpace& space);

bool evaluate_condition(const ConditionExpr& expr, const ParameterSpace& space,
                        std::span<const Value> values);

std::vector<Violation> validate_configuration(const ParameterSpace& space,
                                              const Configuration& config);

std::set<std::string> active_parameters(const ParameterSpace& space, const Configuration& config);

/// Sets every parameter whose condition is false to INACTIVE, walking the
/// evaluation order. Active parameters keep their values.
void rederive_activation(const ParameterSpace& space, std::vector<Value>& values);

/// Shortest text that parses back to the same double.
std::string format_real(double x);

/// Textual form used on target command lines and in output files.
/// INACTIVE renders as the empty string.
std::string format_value(const ParameterSpec& spec, const Value& v);

/// Inverse of format_value. Empty text yields INACTIVE.
/// Throws std::invalid_argument for malformed text.
Value parse_value(const ParameterSpec& spec, std::string_view text);

}  // namespace racetune
