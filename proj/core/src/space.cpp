#include "racetune/space.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace racetune {

std::size_t ParameterSpec::cardinality() const noexcept {
  if (kind == ParamKind::categorical) return levels.size();
  if (kind == ParamKind::integer) return static_cast<std::size_t>(upper - lower) + 1;
  return 0;
}

namespace {

void check_spec(const ParameterSpec& p) {
  if (p.name.empty()) throw ParseError(0, 0, "parameter with empty name");
  if (p.is_numeric()) {
    if (!std::isfinite(p.lower) || !std::isfinite(p.upper) || !(p.lower < p.upper))
      throw ParseError(0, 0, "parameter '" + p.name + "': domain requires lb < ub");
    if (p.scale == Scale::log && !(p.lower > 0.0))
      throw ParseError(0, 0, "parameter '" + p.name + "': log scale requires lb > 0");
    if (p.kind == ParamKind::integer &&
        (std::floor(p.lower) != p.lower || std::floor(p.upper) != p.upper))
      throw ParseError(0, 0, "parameter '" + p.name + "': integer bounds must be integral");
  } else {
    if (p.levels.size() < 2)
      throw ParseError(0, 0, "parameter '" + p.name + "': categorical domain needs >= 2 values");
    std::set<std::string> seen(p.levels.begin(), p.levels.end());
    if (seen.size() != p.levels.size())
      throw ParseError(0, 0, "parameter '" + p.name + "': duplicate categorical value");
  }
}

ScalarView view_of(const ParameterSpec& spec, const Value& v) {
  ScalarView out;
  if (const auto* d = std::get_if<double>(&v)) {
    out.kind = ScalarView::Kind::number;
    out.number = *d;
  } else if (const auto* l = std::get_if<Level>(&v)) {
    out.kind = ScalarView::Kind::string;
    if (l->index < spec.levels.size()) out.text = spec.levels[l->index];
  }
  return out;
}

}  // namespace

ParameterSpace::ParameterSpace(std::vector<ParameterSpec> params) : params_(std::move(params)) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    check_spec(params_[i]);
    if (!by_name_.emplace(params_[i].name, i).second)
      throw ParseError(0, 0, "duplicate parameter name '" + params_[i].name + "'");
  }
  auto lookup = [this](const std::string& name) { return index_of(name); };
  std::vector<std::vector<std::size_t>> dependents(params_.size());
  std::vector<std::size_t> indegree(params_.size(), 0);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i].condition) continue;
    try {
      params_[i].condition->resolve(lookup);
    } catch (const ParseError& e) {
      throw ParseError(0, 0, "parameter '" + params_[i].name + "': " + e.what());
    }
    auto refs = params_[i].condition->references();
    std::sort(refs.begin(), refs.end());
    refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
    for (auto r : refs) {
      if (r == i)
        throw ParseError(0, 0, "parameter '" + params_[i].name + "': condition references itself");
      dependents[r].push_back(i);
      ++indegree[i];
    }
  }
  // Kahn's algorithm with a min-heap keeps declaration order among ready nodes.
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (indegree[i] == 0) ready.push(i);
  while (!ready.empty()) {
    auto i = ready.top();
    ready.pop();
    order_.push_back(i);
    for (auto d : dependents[i])
      if (--indegree[d] == 0) ready.push(d);
  }
  if (order_.size() != params_.size()) {
    std::string names;
    for (std::size_t i = 0; i < params_.size(); ++i)
      if (indegree[i] > 0) names += (names.empty() ? "" : ", ") + params_[i].name;
    throw ParseError(0, 0, "cyclic conditions among parameters: " + names);
  }
}

std::optional<std::size_t> ParameterSpace::index_of(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::size_t ParameterSpace::at(std::string_view name) const {
  if (auto i = index_of(name)) return *i;
  throw std::out_of_range("unknown parameter '" + std::string(name) + "'");
}

bool ParameterSpace::condition_holds(std::size_t i, std::span<const Value> values) const {
  const auto& spec = params_[i];
  if (!spec.condition) return true;
  return evaluate_condition(*spec.condition, *this, values);
}

bool evaluate_condition(const ConditionExpr& expr, const ParameterSpace& space,
                        std::span<const Value> values) {
  return expr.evaluate([&](std::size_t idx) {
    if (idx >= values.size()) return ScalarView{};
    return view_of(space[idx], values[idx]);
  });
}

// ---------------------------------------------------------------------------
// Parameter file reader

namespace {

class LineReader {
 public:
  LineReader(std::string_view line, std::size_t lineno) : s_(line), lineno_(lineno) {}

  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool done() {
    skip_space();
    return pos_ >= s_.size();
  }
  char peek() {
    skip_space();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  std::size_t pos() const { return pos_; }

  std::string word() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
           s_[pos_] != '(' && s_[pos_] != '{' && s_[pos_] != '|')
      ++pos_;
    if (start == pos_) fail(start, "expected a word");
    return std::string(s_.substr(start, pos_ - start));
  }

  /// Contents between `open` and the matching `close`, exclusive.
  std::string_view enclosed(char open, char close) {
    skip_space();
    if (pos_ >= s_.size() || s_[pos_] != open)
      fail(pos_, std::string("expected '") + open + "'");
    std::size_t start = ++pos_;
    bool quoted = false;
    char q = 0;
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (quoted) {
        if (c == q) quoted = false;
      } else if (c == '"' || c == '\'') {
        quoted = true;
        q = c;
      } else if (c == close) {
        break;
      }
      ++pos_;
    }
    if (pos_ >= s_.size()) fail(start - 1, std::string("unterminated domain, expected '") + close + "'");
    return s_.substr(start, pos_++ - start);
  }

  std::string_view rest() {
    auto r = s_.substr(pos_);
    pos_ = s_.size();
    return r;
  }

  [[noreturn]] void fail(std::size_t col, const std::string& msg) const {
    throw ParseError(lineno_, col + 1, msg);
  }

 private:
  std::string_view s_;
  std::size_t lineno_;
  std::size_t pos_ = 0;
};

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split_items(std::string_view body) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  char q = 0;
  for (char c : body) {
    if (quoted) {
      if (c == q) quoted = false;
      cur.push_back(c);
    } else if (c == '"' || c == '\'') {
      quoted = true;
      q = c;
      cur.push_back(c);
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

bool parse_double(std::string_view text, double& out) {
  auto t = trim(text);
  if (!t.empty() && t.front() == '+') t.erase(0, 1);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size() && !t.empty();
}

/// Strips a trailing `#` comment that is not inside quotes.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  char q = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == q) quoted = false;
    } else if (c == '"' || c == '\'') {
      quoted = true;
      q = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

}  // namespace

ParameterSpace parse_parameter_file(std::string_view text) {
  std::vector<ParameterSpec> specs;
  std::vector<std::size_t> linenos;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto raw = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    auto line = strip_comment(raw);
    LineReader r(line, lineno);
    if (r.done()) {
      if (end == text.size()) break;
      continue;
    }

    ParameterSpec spec;
    spec.name = r.word();
    auto name_ok = std::all_of(spec.name.begin(), spec.name.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
    });
    if (!name_ok || std::isdigit(static_cast<unsigned char>(spec.name.front())))
      r.fail(0, "invalid parameter name '" + spec.name + "'");
    auto kind_pos = (r.skip_space(), r.pos());
    auto kind = r.word();
    if (kind == "r") spec.kind = ParamKind::real;
    else if (kind == "i") spec.kind = ParamKind::integer;
    else if (kind == "c") spec.kind = ParamKind::categorical;
    else r.fail(kind_pos, "unknown parameter kind '" + kind + "' (expected r, i, or c)");

    auto domain_pos = (r.skip_space(), r.pos());
    if (spec.is_numeric()) {
      auto items = split_items(r.enclosed('(', ')'));
      if (items.size() != 2 || !parse_double(items[0], spec.lower) ||
          !parse_double(items[1], spec.upper))
        r.fail(domain_pos, "malformed numeric domain, expected (lb, ub)");
    } else {
      for (auto& item : split_items(r.enclosed('{', '}'))) {
        auto v = unquote(item);
        if (v.empty()) r.fail(domain_pos, "empty categorical value");
        spec.levels.push_back(v);
      }
    }

    if (!r.done() && r.peek() != '|') {
      auto tok_pos = (r.skip_space(), r.pos());
      auto tok = r.word();
      if (tok != "log") r.fail(tok_pos, "unexpected token '" + tok + "'");
      if (!spec.is_numeric()) r.fail(tok_pos, "log scale is only valid for numeric parameters");
      spec.scale = Scale::log;
    }
    std::optional<ConditionExpr> condition;
    if (!r.done()) {
      if (r.peek() != '|') r.fail(r.pos(), "expected '|' before condition");
      const auto bar = r.pos();
      condition = ConditionExpr::parse(line.substr(bar + 1), lineno, bar + 1);
    }
    spec.condition = std::move(condition);
    for (std::size_t k = 0; k < specs.size(); ++k)
      if (specs[k].name == spec.name)
        r.fail(0, "duplicate parameter name '" + spec.name + "' (first declared on line " +
                      std::to_string(linenos[k]) + ")");
    specs.push_back(std::move(spec));
    linenos.push_back(lineno);
    try {
      check_spec(specs.back());
    } catch (const ParseError& e) {
      throw ParseError(lineno, domain_pos + 1, e.what());
    }
    if (end == text.size()) break;
  }
  return ParameterSpace(std::move(specs));
}

ParameterSpace load_parameter_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open parameter file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_parameter_file(ss.str());
}

std::string format_real(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string to_parameter_file(const ParameterSpace& space) {
  std::string out;
  for (const auto& p : space.params()) {
    out += p.name;
    switch (p.kind) {
      case ParamKind::real: out += " r "; break;
      case ParamKind::integer: out += " i "; break;
      case ParamKind::categorical: out += " c "; break;
    }
    if (p.is_numeric()) {
      out += "(" + format_real(p.lower) + ", " + format_real(p.upper) + ")";
      if (p.scale == Scale::log) out += " log";
    } else {
      out += "{";
      for (std::size_t i = 0; i < p.levels.size(); ++i) {
        if (i) out += ", ";
        out += "\"" + p.levels[i] + "\"";
      }
      out += "}";
    }
    if (p.condition) out += " | " + p.condition->to_string();
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Violation> validate_configuration(const ParameterSpace& space,
                                              const Configuration& config) {
  std::vector<Violation> out;
  if (config.values.size() != space.size()) {
    out.push_back({Violation::Kind::arity, "",
                   "configuration has " + std::to_string(config.values.size()) +
                       " values for a space of " + std::to_string(space.size())});
    return out;
  }
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& spec = space[i];
    const auto& v = config.values[i];
    const bool should_be_active = space.condition_holds(i, config.values);
    if (should_be_active != is_active(v)) {
      out.push_back({Violation::Kind::activation_mismatch, spec.name,
                     should_be_active ? "parameter is active but has no value"
                                      : "parameter is inactive but has a value"});
      continue;
    }
    if (!is_active(v)) continue;
    if (spec.is_numeric()) {
      const auto* d = std::get_if<double>(&v);
      if (!d) {
        out.push_back({Violation::Kind::type_mismatch, spec.name, "expected a numeric value"});
      } else if (!(*d >= spec.lower && *d <= spec.upper)) {
        out.push_back({Violation::Kind::out_of_domain, spec.name,
                       format_real(*d) + " outside [" + format_real(spec.lower) + ", " +
                           format_real(spec.upper) + "]"});
      } else if (spec.kind == ParamKind::integer && std::floor(*d) != *d) {
        out.push_back({Violation::Kind::not_integral, spec.name, format_real(*d) + " is not an integer"});
      }
    } else {
      const auto* l = std::get_if<Level>(&v);
      if (!l) {
        out.push_back({Violation::Kind::type_mismatch, spec.name, "expected a categorical value"});
      } else if (l->index >= spec.levels.size()) {
        out.push_back({Violation::Kind::unknown_level, spec.name,
                       "level index " + std::to_string(l->index) + " not in domain"});
      }
    }
  }
  return out;
}

std::set<std::string> active_parameters(const ParameterSpace& space, const Configuration& config) {
  std::set<std::string> out;
  std::vector<Value> values = config.values;
  values.resize(space.size());
  // Walk the evaluation order so a parameter whose own condition fails is
  // treated as INACTIVE by everything that depends on it.
  for (auto i : space.evaluation_order()) {
    if (space.condition_holds(i, values)) {
      out.insert(space[i].name);
    } else {
      values[i] = Inactive{};
    }
  }
  return out;
}

void rederive_activation(const ParameterSpace& space, std::vector<Value>& values) {
  for (auto i : space.evaluation_order())
    if (!space.condition_holds(i, values)) values[i] = Inactive{};
}

std::string format_value(const ParameterSpec& spec, const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) {
    if (spec.kind == ParamKind::integer) {
      char buf[32];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(std::llround(*d)));
      return std::string(buf, ptr);
    }
    return format_real(*d);
  }
  if (const auto* l = std::get_if<Level>(&v)) return spec.levels.at(l->index);
  return {};
}

Value parse_value(const ParameterSpec& spec, std::string_view text) {
  auto t = trim(text);
  if (t.empty()) return Inactive{};
  if (spec.kind == ParamKind::categorical) {
    auto u = unquote(t);
    auto it = std::find(spec.levels.begin(), spec.levels.end(), u);
    if (it == spec.levels.end())
      throw std::invalid_argument("'" + u + "' is not a value of parameter '" + spec.name + "'");
    return Level{static_cast<std::size_t>(it - spec.levels.begin())};
  }
  double v = 0.0;
  if (!parse_double(t, v))
    throw std::invalid_argument("'" + t + "' is not a number (parameter '" + spec.name + "')");
  return v;
}

}  // namespace racetune
