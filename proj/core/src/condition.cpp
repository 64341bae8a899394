#include "racetune/condition.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "racetune/space.hpp"

namespace racetune {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error([&] {
        std::ostringstream os;
        if (line > 0) os << "line " << line << ", column " << column << ": ";
        os << what;
        return os.str();
      }()),
      line_(line),
      column_(column) {}

namespace {

struct Token {
  enum class Kind { ident, number, string, op, lparen, rparen, lbrace, rbrace, comma, end };
  Kind kind = Kind::end;
  std::string text;
  double number = 0.0;
  std::size_t column = 0;  // 0-based inside the condition text
};

class Lexer {
 public:
  Lexer(std::string_view text, std::size_t line, std::size_t column_offset)
      : text_(text), line_(line), offset_(column_offset) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t;
      t.column = pos_;
      if (pos_ >= text_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                text_[pos_] == '.' || text_[pos_] == '-'))
          ++pos_;
        t.kind = Token::Kind::ident;
        t.text = std::string(text_.substr(start, pos_ - start));
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
                 ((c == '-' || c == '+') && pos_ + 1 < text_.size() &&
                  (std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
                   text_[pos_ + 1] == '.'))) {
        t.kind = Token::Kind::number;
        t.number = read_number(t.text);
      } else if (c == '"' || c == '\'') {
        t.kind = Token::Kind::string;
        t.text = read_string(c);
      } else if (c == '(') {
        t.kind = Token::Kind::lparen, ++pos_;
      } else if (c == ')') {
        t.kind = Token::Kind::rparen, ++pos_;
      } else if (c == '{') {
        t.kind = Token::Kind::lbrace, ++pos_;
      } else if (c == '}') {
        t.kind = Token::Kind::rbrace, ++pos_;
      } else if (c == ',') {
        t.kind = Token::Kind::comma, ++pos_;
      } else {
        static constexpr std::string_view two[] = {"==", "!=", "<=", ">=", "&&", "||"};
        t.kind = Token::Kind::op;
        for (auto op : two) {
          if (text_.substr(pos_, 2) == op) {
            t.text = std::string(op);
            pos_ += 2;
            break;
          }
        }
        if (t.text.empty()) {
          if (c == '<' || c == '>' || c == '!') {
            t.text = std::string(1, c);
            ++pos_;
          } else {
            fail(pos_, std::string("unexpected character '") + c + "'");
          }
        }
      }
      out.push_back(std::move(t));
    }
  }

  [[noreturn]] void fail(std::size_t col, const std::string& msg) const {
    throw ParseError(line_, offset_ + col + 1, msg);
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  double read_number(std::string& text) {
    std::size_t start = pos_;
    if (text_[pos_] == '+') ++start, ++pos_;
    else if (text_[pos_] == '-') ++pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
            text_[pos_] == 'e' || text_[pos_] == 'E' ||
            ((text_[pos_] == '-' || text_[pos_] == '+') &&
             (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
      ++pos_;
    text = std::string(text_.substr(start, pos_ - start));
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
      fail(start, "malformed number '" + text + "'");
    return v;
  }

  std::string read_string(char quote) {
    std::size_t start = pos_++;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != quote) out.push_back(text_[pos_++]);
    if (pos_ >= text_.size()) fail(start, "unterminated string literal");
    ++pos_;
    return out;
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t offset_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, const Lexer& lexer) : toks_(std::move(tokens)), lexer_(lexer) {}

  ConditionNode parse() {
    auto node = parse_or();
    if (peek().kind != Token::Kind::end) lexer_.fail(peek().column, "unexpected trailing input");
    return node;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& take() { return toks_[pos_++]; }

  bool is_word(const Token& t, std::string_view w) const {
    return t.kind == Token::Kind::ident && t.text == w;
  }
  bool is_op(const Token& t, std::string_view w) const {
    return t.kind == Token::Kind::op && t.text == w;
  }

  ConditionNode parse_or() {
    auto first = parse_and();
    if (!(is_word(peek(), "or") || is_op(peek(), "||"))) return first;
    ConditionNode node;
    node.kind = ConditionNode::Kind::any_of;
    node.children.push_back(std::move(first));
    while (is_word(peek(), "or") || is_op(peek(), "||")) {
      take();
      node.children.push_back(parse_and());
    }
    return node;
  }

  ConditionNode parse_and() {
    auto first = parse_unary();
    if (!(is_word(peek(), "and") || is_op(peek(), "&&"))) return first;
    ConditionNode node;
    node.kind = ConditionNode::Kind::all_of;
    node.children.push_back(std::move(first));
    while (is_word(peek(), "and") || is_op(peek(), "&&")) {
      take();
      node.children.push_back(parse_unary());
    }
    return node;
  }

  ConditionNode parse_unary() {
    if (is_word(peek(), "not") || is_op(peek(), "!")) {
      take();
      ConditionNode node;
      node.kind = ConditionNode::Kind::negate;
      node.children.push_back(parse_unary());
      return node;
    }
    if (peek().kind == Token::Kind::lparen) {
      take();
      auto inner = parse_or();
      if (peek().kind != Token::Kind::rparen) lexer_.fail(peek().column, "expected ')'");
      take();
      return inner;
    }
    return parse_predicate();
  }

  Operand parse_operand() {
    const Token& t = take();
    Operand o;
    switch (t.kind) {
      case Token::Kind::ident:
        if (t.text == "and" || t.text == "or" || t.text == "not" || t.text == "in")
          lexer_.fail(t.column, "expected operand, found keyword '" + t.text + "'");
        o.kind = Operand::Kind::parameter;
        o.text = t.text;
        return o;
      case Token::Kind::number:
        o.kind = Operand::Kind::number;
        o.number = t.number;
        return o;
      case Token::Kind::string:
        o.kind = Operand::Kind::string;
        o.text = t.text;
        return o;
      default:
        lexer_.fail(t.column, "expected parameter name or literal");
    }
  }

  ConditionNode parse_predicate() {
    ConditionNode node;
    node.lhs = parse_operand();
    const Token& t = peek();
    if (is_word(t, "in")) {
      take();
      node.kind = ConditionNode::Kind::member;
      if (peek().kind != Token::Kind::lbrace) lexer_.fail(peek().column, "expected '{' after 'in'");
      take();
      while (true) {
        node.set.push_back(parse_operand());
        if (peek().kind == Token::Kind::comma) {
          take();
          continue;
        }
        if (peek().kind == Token::Kind::rbrace) {
          take();
          break;
        }
        lexer_.fail(peek().column, "expected ',' or '}' in set");
      }
      return node;
    }
    if (t.kind != Token::Kind::op || t.text == "!" || t.text == "&&" || t.text == "||")
      lexer_.fail(t.column, "expected comparison operator");
    static const std::pair<std::string_view, CompareOp> ops[] = {
        {"==", CompareOp::eq}, {"!=", CompareOp::ne}, {"<", CompareOp::lt},
        {"<=", CompareOp::le}, {">", CompareOp::gt},  {">=", CompareOp::ge}};
    for (auto [text, op] : ops)
      if (t.text == text) node.op = op;
    take();
    node.kind = ConditionNode::Kind::compare;
    node.rhs = parse_operand();
    return node;
  }

  std::vector<Token> toks_;
  const Lexer& lexer_;
  std::size_t pos_ = 0;
};

void resolve_operand(Operand& o,
                     const std::function<std::optional<std::size_t>(const std::string&)>& lookup) {
  if (o.kind != Operand::Kind::parameter) return;
  if (auto idx = lookup(o.text)) {
    o.index = *idx;
  } else {
    o.kind = Operand::Kind::string;
  }
}

void resolve_node(ConditionNode& n,
                  const std::function<std::optional<std::size_t>(const std::string&)>& lookup) {
  switch (n.kind) {
    case ConditionNode::Kind::compare:
      resolve_operand(n.lhs, lookup);
      resolve_operand(n.rhs, lookup);
      if (n.lhs.kind != Operand::Kind::parameter && n.rhs.kind != Operand::Kind::parameter)
        throw ParseError(0, 0, "comparison '" + n.lhs.text + "' does not reference a parameter");
      break;
    case ConditionNode::Kind::member:
      resolve_operand(n.lhs, lookup);
      if (n.lhs.kind != Operand::Kind::parameter)
        throw ParseError(0, 0, "unknown parameter '" + n.lhs.text + "' in membership test");
      for (auto& o : n.set) {
        if (o.kind == Operand::Kind::parameter) o.kind = Operand::Kind::string;
      }
      break;
    default:
      for (auto& c : n.children) resolve_node(c, lookup);
  }
}

ScalarView literal_view(const Operand& o) {
  ScalarView v;
  if (o.kind == Operand::Kind::number) {
    v.kind = ScalarView::Kind::number;
    v.number = o.number;
  } else {
    v.kind = ScalarView::Kind::string;
    v.text = o.text;
  }
  return v;
}

std::optional<double> as_number(const ScalarView& v) {
  if (v.kind == ScalarView::Kind::number) return v.number;
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), out);
  if (ec != std::errc() || ptr != v.text.data() + v.text.size()) return std::nullopt;
  return out;
}

template <typename T>
bool apply(CompareOp op, const T& a, const T& b) {
  switch (op) {
    case CompareOp::eq: return a == b;
    case CompareOp::ne: return a != b;
    case CompareOp::lt: return a < b;
    case CompareOp::le: return a <= b;
    case CompareOp::gt: return a > b;
    case CompareOp::ge: return a >= b;
  }
  return false;
}

bool compare(CompareOp op, const ScalarView& a, const ScalarView& b) {
  if (a.kind == ScalarView::Kind::inactive || b.kind == ScalarView::Kind::inactive) return false;
  if (a.kind == ScalarView::Kind::string && b.kind == ScalarView::Kind::string)
    return apply(op, a.text, b.text);
  auto x = as_number(a);
  auto y = as_number(b);
  if (!x || !y) return op == CompareOp::ne;
  return apply(op, *x, *y);
}

bool eval_node(const ConditionNode& n, const std::function<ScalarView(std::size_t)>& value_of) {
  auto view = [&](const Operand& o) {
    return o.kind == Operand::Kind::parameter ? value_of(o.index) : literal_view(o);
  };
  switch (n.kind) {
    case ConditionNode::Kind::compare:
      return compare(n.op, view(n.lhs), view(n.rhs));
    case ConditionNode::Kind::member: {
      const auto subject = view(n.lhs);
      if (subject.kind == ScalarView::Kind::inactive) return false;
      for (const auto& o : n.set)
        if (compare(CompareOp::eq, subject, literal_view(o))) return true;
      return false;
    }
    case ConditionNode::Kind::all_of:
      for (const auto& c : n.children)
        if (!eval_node(c, value_of)) return false;
      return true;
    case ConditionNode::Kind::any_of:
      for (const auto& c : n.children)
        if (eval_node(c, value_of)) return true;
      return false;
    case ConditionNode::Kind::negate:
      return !eval_node(n.children.front(), value_of);
  }
  return false;
}

void collect(const ConditionNode& n, std::vector<const Operand*>& out) {
  switch (n.kind) {
    case ConditionNode::Kind::compare:
      if (n.lhs.kind == Operand::Kind::parameter) out.push_back(&n.lhs);
      if (n.rhs.kind == Operand::Kind::parameter) out.push_back(&n.rhs);
      break;
    case ConditionNode::Kind::member:
      if (n.lhs.kind == Operand::Kind::parameter) out.push_back(&n.lhs);
      break;
    default:
      for (const auto& c : n.children) collect(c, out);
  }
}

std::string operand_text(const Operand& o) {
  switch (o.kind) {
    case Operand::Kind::parameter: return o.text;
    case Operand::Kind::number: return format_real(o.number);
    case Operand::Kind::string: return "\"" + o.text + "\"";
  }
  return {};
}

std::string node_text(const ConditionNode& n) {
  static constexpr std::string_view op_text[] = {"==", "!=", "<", "<=", ">", ">="};
  switch (n.kind) {
    case ConditionNode::Kind::compare:
      return operand_text(n.lhs) + " " + std::string(op_text[static_cast<int>(n.op)]) + " " +
             operand_text(n.rhs);
    case ConditionNode::Kind::member: {
      std::string s = operand_text(n.lhs) + " in {";
      for (std::size_t i = 0; i < n.set.size(); ++i) {
        if (i) s += ", ";
        s += operand_text(n.set[i]);
      }
      return s + "}";
    }
    case ConditionNode::Kind::negate:
      return "not (" + node_text(n.children.front()) + ")";
    case ConditionNode::Kind::all_of:
    case ConditionNode::Kind::any_of: {
      const char* sep = n.kind == ConditionNode::Kind::all_of ? " and " : " or ";
      std::string s;
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) s += sep;
        s += "(" + node_text(n.children[i]) + ")";
      }
      return s;
    }
  }
  return {};
}

}  // namespace

ConditionExpr ConditionExpr::parse(std::string_view text, std::size_t line,
                                   std::size_t column_offset) {
  Lexer lexer(text, line, column_offset);
  auto tokens = lexer.run();
  if (tokens.size() == 1) lexer.fail(0, "empty condition");
  Parser parser(std::move(tokens), lexer);
  return ConditionExpr(parser.parse());
}

void ConditionExpr::resolve(
    const std::function<std::optional<std::size_t>(const std::string&)>& lookup) {
  resolve_node(root_, lookup);
}

bool ConditionExpr::evaluate(const std::function<ScalarView(std::size_t)>& value_of) const {
  return eval_node(root_, value_of);
}

std::vector<std::size_t> ConditionExpr::references() const {
  std::vector<const Operand*> ops;
  collect(root_, ops);
  std::vector<std::size_t> out;
  for (auto* o : ops) out.push_back(o->index);
  return out;
}

std::vector<std::string> ConditionExpr::referenced_names() const {
  std::vector<const Operand*> ops;
  collect(root_, ops);
  std::vector<std::string> out;
  for (auto* o : ops) out.push_back(o->text);
  return out;
}

std::string ConditionExpr::to_string() const { return node_text(root_); }

}  // namespace racetune
