#include <cctype>
#include <charconv>
#include <set>
#include <string>
#include <vector>

#include "changesim/dag.hpp"

namespace changesim::dag {

namespace {

enum class TokKind { Ident, Number, Arrow, LBrace, RBrace, LBracket, RBracket, Comma, Equals, End };

struct Token {
  TokKind kind;
  std::string text;
  int line;
  int column;
};

class Lexer {
public:
  explicit Lexer(const std::string& text) : text_(text) {}

  Token next() {
    skip_ws();
    const int line = line_, col = col_;
    if (pos_ >= text_.size()) return {TokKind::End, "", line, col};
    const char c = text_[pos_];
    if (c == '{') return single(TokKind::LBrace, line, col);
    if (c == '}') return single(TokKind::RBrace, line, col);
    if (c == '[') return single(TokKind::LBracket, line, col);
    if (c == ']') return single(TokKind::RBracket, line, col);
    if (c == ',') return single(TokKind::Comma, line, col);
    if (c == '=') return single(TokKind::Equals, line, col);
    if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
      advance();
      advance();
      return {TokKind::Arrow, "->", line, col};
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string ident;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_')) {
        ident += text_[pos_];
        advance();
      }
      return {TokKind::Ident, ident, line, col};
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' ||
        c == '.') {
      std::string num;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '.' || text_[pos_] == '-' || text_[pos_] == '+' ||
              text_[pos_] == 'e' || text_[pos_] == 'E')) {
        num += text_[pos_];
        advance();
      }
      return {TokKind::Number, num, line, col};
    }
    throw DslParseError(std::string("unexpected character '") + c + "'", line,
                        col);
  }

private:
  void skip_ws() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      // ';' is an insignificant optional separator.
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == ';')
        advance();
      else
        break;
    }
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  Token single(TokKind k, int line, int col) {
    std::string t(1, text_[pos_]);
    advance();
    return {k, t, line, col};
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
public:
  explicit Parser(const std::string& text) : lexer_(text) { bump(); }

  Dag parse() {
    expect_ident("dag");
    expect(TokKind::LBrace, "'{'");
    while (cur_.kind != TokKind::RBrace) {
      if (cur_.kind == TokKind::End)
        throw DslParseError("unterminated dag block: expected '}'", cur_.line,
                            cur_.column);
      statement();
    }
    bump();  // '}'
    if (cur_.kind != TokKind::End)
      throw DslParseError("trailing input after '}'", cur_.line, cur_.column);
    dag_.validate();
    return dag_;
  }

private:
  void statement() {
    if (cur_.kind != TokKind::Ident)
      throw DslParseError("expected node name, got '" + cur_.text + "'",
                          cur_.line, cur_.column);
    const Token name = cur_;
    bump();
    if (cur_.kind == TokKind::Arrow) {
      bump();
      if (cur_.kind != TokKind::Ident)
        throw DslParseError("expected target node name after '->'", cur_.line,
                            cur_.column);
      const Token target = cur_;
      bump();
      std::optional<double> beta;
      if (cur_.kind == TokKind::LBracket) beta = edge_attrs();
      dag_.add_edge(name.text, target.text, beta);
      return;
    }
    // Node declaration. Auto-created nodes (from earlier edge mentions) may
    // be refined by one explicit declaration; a second one is a duplicate.
    const bool existed = dag_.has_node(name.text);
    if (existed && declared_.count(name.text))
      throw DslParseError("duplicate node '" + name.text + "'", name.line,
                          name.column);
    if (!existed) dag_.ensure_node(name.text);
    declared_.insert(name.text);
    if (cur_.kind == TokKind::LBracket) node_attrs(name.text);
  }

  void node_attrs(const std::string& node_name) {
    bump();  // '['
    Node& node = dag_.node_at(dag_.index_of(node_name));
    while (true) {
      if (cur_.kind != TokKind::Ident)
        throw DslParseError("expected attribute name", cur_.line,
                            cur_.column);
      const std::string attr = cur_.text;
      if (attr == "latent")
        node.kind = NodeKind::Latent;
      else if (attr == "deterministic")
        node.kind = NodeKind::Deterministic;
      else if (attr == "exposure")
        node.exposure_mark = true;
      else if (attr == "outcome")
        node.outcome_mark = true;
      else
        throw DslParseError(
            "unknown attribute '" + attr +
                "' (expected latent, deterministic, exposure or outcome)",
            cur_.line, cur_.column);
      bump();
      if (cur_.kind == TokKind::Comma) {
        bump();
        continue;
      }
      expect(TokKind::RBracket, "']'");
      return;
    }
  }

  double edge_attrs() {
    bump();  // '['
    if (cur_.kind != TokKind::Ident || cur_.text != "beta")
      throw DslParseError("unknown edge attribute '" + cur_.text +
                              "' (only beta= is supported)",
                          cur_.line, cur_.column);
    bump();
    expect(TokKind::Equals, "'='");
    if (cur_.kind != TokKind::Number)
      throw DslParseError("expected a number after beta=", cur_.line,
                          cur_.column);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(
        cur_.text.data(), cur_.text.data() + cur_.text.size(), value);
    if (ec != std::errc{} || ptr != cur_.text.data() + cur_.text.size())
      throw DslParseError("malformed number '" + cur_.text + "'", cur_.line,
                          cur_.column);
    bump();
    expect(TokKind::RBracket, "']'");
    return value;
  }

  void expect(TokKind k, const std::string& what) {
    if (cur_.kind != k)
      throw DslParseError("expected " + what + ", got '" + cur_.text + "'",
                          cur_.line, cur_.column);
    bump();
  }

  void expect_ident(const std::string& word) {
    if (cur_.kind != TokKind::Ident || cur_.text != word)
      throw DslParseError("expected '" + word + "'", cur_.line, cur_.column);
    bump();
  }

  void bump() { cur_ = lexer_.next(); }

  Lexer lexer_;
  Token cur_{TokKind::End, "", 1, 1};
  Dag dag_;
  std::set<std::string> declared_;
};

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw InternalError("number formatting failed");
  return std::string(buf, ptr);
}

}  // namespace

Dag parse_dag(const std::string& text) { return Parser(text).parse(); }

std::string print_dag(const Dag& d) {
  if (d.nodes().empty()) return "dag { }";
  std::string out = "dag {\n";
  for (const Node& n : d.nodes()) {
    out += "  " + n.name;
    std::vector<std::string> attrs;
    if (n.kind == NodeKind::Latent) attrs.push_back("latent");
    if (n.kind == NodeKind::Deterministic) attrs.push_back("deterministic");
    if (n.exposure_mark) attrs.push_back("exposure");
    if (n.outcome_mark) attrs.push_back("outcome");
    if (!attrs.empty()) {
      out += " [";
      for (std::size_t i = 0; i < attrs.size(); ++i)
        out += (i ? ", " : "") + attrs[i];
      out += "]";
    }
    out += "\n";
  }
  for (const Edge& e : d.edges()) {
    out += "  " + d.nodes()[e.from].name + " -> " + d.nodes()[e.to].name;
    if (e.beta.has_value()) out += " [beta=" + format_double(*e.beta) + "]";
    out += "\n";
  }
  out += "}";
  return out;
}

}  // namespace changesim::dag
