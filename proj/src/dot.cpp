#include "mem2graph/dot.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mem2graph/error.hpp"

namespace mem2graph {

namespace {

struct Style {
  const char* color;
  const char* shape;  // nullptr: default shape
};

Style style_of(NodeType t) {
  switch (t) {
    case NodeType::CHN: return {"cyan", "square"};
    case NodeType::PN: return {"orange", "hexagon"};
    case NodeType::KN: return {"green", nullptr};
    case NodeType::VN: return {"grey", nullptr};
  }
  return {"grey", nullptr};
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

bool same_values(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) && std::isnan(b[i])) continue;
    if (a[i] != b[i]) return false;
  }
  return true;
}

std::string format_comment(const GraphComment& c) {
  std::string s = "{ 'embedding-type': '" + c.embedding_type + "', 'embedding-fields': [";
  for (std::size_t i = 0; i < c.fields.size(); ++i) {
    if (i) s += ',';
    s += "'" + c.fields[i] + "'";
  }
  return s + "] }";
}

std::string format_values(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_number(v[i]);
  }
  return s + "]";
}

// ---- tokenizer -------------------------------------------------------------

enum class Tok { Id, LBrace, RBrace, LBracket, RBracket, Eq, Semi, Comma, Arrow, End };

struct Token {
  Tok kind;
  std::string text;
  bool quoted = false;
  std::size_t line;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  Token next() {
    skip();
    if (pos_ >= s_.size()) return {Tok::End, "", false, line_};
    const char c = s_[pos_];
    const std::size_t line = line_;
    switch (c) {
      case '{': ++pos_; return {Tok::LBrace, "{", false, line};
      case '}': ++pos_; return {Tok::RBrace, "}", false, line};
      case '[': ++pos_; return {Tok::LBracket, "[", false, line};
      case ']': ++pos_; return {Tok::RBracket, "]", false, line};
      case '=': ++pos_; return {Tok::Eq, "=", false, line};
      case ';': ++pos_; return {Tok::Semi, ";", false, line};
      case ',': ++pos_; return {Tok::Comma, ",", false, line};
      default: break;
    }
    if (c == '-' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '>') {
      pos_ += 2;
      return {Tok::Arrow, "->", false, line};
    }
    if (c == '"') return quoted(line);
    if (is_id_char(c)) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && is_id_char(s_[pos_])) {
        if (s_[pos_] == '-' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '>') break;
        ++pos_;
      }
      return {Tok::Id, std::string(s_.substr(start, pos_ - start)), false, line};
    }
    throw DotParseError(line, std::string("unexpected character '") + c + "'");
  }

 private:
  static bool is_id_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
  }

  void skip() {
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '/' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '/') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (c == '#' && (pos_ == 0 || s_[pos_ - 1] == '\n')) {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (c == '/' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '*') {
        const std::size_t start_line = line_;
        pos_ += 2;
        while (pos_ + 1 < s_.size() && !(s_[pos_] == '*' && s_[pos_ + 1] == '/')) {
          if (s_[pos_] == '\n') ++line_;
          ++pos_;
        }
        if (pos_ + 1 >= s_.size()) throw DotParseError(start_line, "unterminated comment");
        pos_ += 2;
      } else {
        break;
      }
    }
  }

  Token quoted(std::size_t line) {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_];
      if (c == '\\' && pos_ + 1 < s_.size()) {
        char n = s_[pos_ + 1];
        if (n == '"' || n == '\\') {
          out += n;
          pos_ += 2;
          continue;
        }
        if (n == '\n') {  // line continuation
          ++line_;
          pos_ += 2;
          continue;
        }
      }
      if (c == '\n') ++line_;
      out += c;
      ++pos_;
    }
    if (pos_ >= s_.size()) throw DotParseError(line, "unterminated string");
    ++pos_;
    return {Tok::Id, std::move(out), true, line};
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) { advance(); }

  DotDocument run() {
    DotDocument doc;
    if (cur_.kind == Tok::Id && cur_.text == "strict") advance();
    if (cur_.kind != Tok::Id || cur_.text != "digraph") fail("expected 'digraph'");
    advance();
    if (cur_.kind == Tok::Id) {
      doc.name = cur_.text;
      advance();
    }
    expect(Tok::LBrace, "'{'");
    while (cur_.kind != Tok::RBrace) {
      if (cur_.kind == Tok::End) fail("missing closing '}'");
      statement(doc);
    }
    advance();
    if (cur_.kind != Tok::End) fail("trailing content after graph");
    return doc;
  }

 private:
  using Attrs = std::vector<std::pair<std::string, Token>>;

  [[noreturn]] void fail(const std::string& what) const { throw DotParseError(cur_.line, what); }

  void advance() { cur_ = lex_.next(); }

  void expect(Tok k, const char* what) {
    if (cur_.kind != k) fail(std::string("expected ") + what + ", got '" + cur_.text + "'");
    advance();
  }

  Attrs attr_list() {
    Attrs attrs;
    while (cur_.kind == Tok::LBracket) {
      advance();
      while (cur_.kind != Tok::RBracket) {
        if (cur_.kind != Tok::Id) fail("expected attribute name");
        std::string name = cur_.text;
        advance();
        expect(Tok::Eq, "'='");
        if (cur_.kind != Tok::Id) fail("expected attribute value");
        attrs.emplace_back(std::move(name), cur_);
        advance();
        if (cur_.kind == Tok::Comma || cur_.kind == Tok::Semi) advance();
      }
      advance();
    }
    return attrs;
  }

  static const Token* find(const Attrs& attrs, std::string_view name) {
    const Token* hit = nullptr;
    for (const auto& [n, v] : attrs)
      if (n == name) hit = &v;
    return hit;
  }

  void statement(DotDocument& doc) {
    if (cur_.kind != Tok::Id) fail("expected statement, got '" + cur_.text + "'");
    Token first = cur_;
    advance();

    if (!first.quoted && (first.text == "graph" || first.text == "node" || first.text == "edge") &&
        cur_.kind == Tok::LBracket) {
      (void)attr_list();  // defaults carry nothing this format relies on
    } else if (cur_.kind == Tok::Eq) {
      advance();
      if (cur_.kind != Tok::Id) fail("expected value after '='");
      Token value = cur_;
      advance();
      if (first.text == "comment") doc.comment = graph_comment(value);
    } else if (cur_.kind == Tok::Arrow) {
      advance();
      if (cur_.kind != Tok::Id) fail("expected edge target");
      Token target = cur_;
      advance();
      if (cur_.kind == Tok::Arrow) fail("edge chains are not supported");
      Attrs attrs = attr_list();
      check_id(first);
      check_id(target);
      DotEdge e;
      e.source = first.text;
      e.target = target.text;
      const Token* label = find(attrs, "label");
      if (!label) fail("edge without label");
      if (label->text == "dts")
        e.type = EdgeType::Dts;
      else if (label->text == "ptr")
        e.type = EdgeType::Ptr;
      else
        throw DotParseError(label->line, "unknown edge label '" + label->text + "'");
      if (const Token* w = find(attrs, "weight")) {
        auto [p, ec] = std::from_chars(w->text.data(), w->text.data() + w->text.size(), e.weight);
        if (ec != std::errc() || p != w->text.data() + w->text.size())
          throw DotParseError(w->line, "bad edge weight '" + w->text + "'");
      }
      doc.edges.push_back(std::move(e));
    } else {
      Attrs attrs = attr_list();
      ParsedNodeId pid = check_id(first);
      DotNode n;
      n.id = first.text;
      n.type = pid.type;
      n.address = pid.address;
      n.key = pid.key;
      if (const Token* label = find(attrs, "label")) n.label = label->text;
      if (const Token* key = find(attrs, "key")) {
        if (key->text.size() != 1) throw DotParseError(key->line, "bad key attribute '" + key->text + "'");
        n.key = key->text[0];
      }
      if (const Token* c = find(attrs, "comment")) n.comment = node_values(*c);
      doc.nodes.push_back(std::move(n));
    }
    if (cur_.kind == Tok::Semi) advance();
  }

  ParsedNodeId check_id(const Token& t) {
    try {
      return parse_node_id(t.text);
    } catch (const FormatError& e) {
      throw DotParseError(t.line, e.what());
    }
  }

  static GraphComment graph_comment(const Token& t) {
    std::string text = t.text;
    for (char& c : text)
      if (c == '\'') c = '"';
    try {
      auto j = nlohmann::json::parse(text);
      GraphComment gc;
      gc.embedding_type = j.at("embedding-type").get<std::string>();
      gc.fields = j.at("embedding-fields").get<std::vector<std::string>>();
      return gc;
    } catch (const nlohmann::json::exception& e) {
      throw DotParseError(t.line, std::string("bad graph comment: ") + e.what());
    }
  }

  static std::vector<double> node_values(const Token& t) {
    std::string_view s = t.text;
    auto trim = [](std::string_view v) {
      while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
      while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
      return v;
    };
    s = trim(s);
    if (s.size() < 2 || s.front() != '[' || s.back() != ']') throw DotParseError(t.line, "node comment is not a list");
    s = trim(s.substr(1, s.size() - 2));
    std::vector<double> out;
    while (!s.empty()) {
      auto comma = s.find(',');
      std::string_view item = trim(s.substr(0, comma));
      s = comma == std::string_view::npos ? std::string_view() : s.substr(comma + 1);
      if (item == "NaN" || item == "nan") {
        out.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      double v = 0;
      auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc() || p != item.data() + item.size() || item.empty())
        throw DotParseError(t.line, "bad number '" + std::string(item) + "' in node comment");
      out.push_back(v);
    }
    return out;
  }

  Lexer lex_;
  Token cur_{Tok::End, "", false, 1};
};

}  // namespace

bool DotNode::operator==(const DotNode& o) const {
  if (id != o.id || type != o.type || address != o.address || key != o.key || label != o.label) return false;
  if (comment.has_value() != o.comment.has_value()) return false;
  return !comment || same_values(*comment, *o.comment);
}

ParsedNodeId parse_node_id(std::string_view id) {
  auto open = id.find('(');
  if (open == std::string_view::npos || id.back() != ')' || id.substr(open + 1, 2) != "0x")
    throw FormatError("malformed node id '" + std::string(id) + "'");
  std::string_view prefix = id.substr(0, open);
  std::string_view hex = id.substr(open + 3, id.size() - open - 4);
  ParsedNodeId out{NodeType::VN, std::nullopt, 0};
  if (prefix == "CHN")
    out.type = NodeType::CHN;
  else if (prefix == "PN")
    out.type = NodeType::PN;
  else if (prefix == "VN")
    out.type = NodeType::VN;
  else if (prefix.size() == 8 && prefix.starts_with("KN_KEY_") && prefix[7] >= 'A' && prefix[7] <= 'Z') {
    out.type = NodeType::KN;
    out.key = prefix[7];
  } else {
    throw FormatError("unknown node type '" + std::string(prefix) + "' in '" + std::string(id) + "'");
  }
  auto [p, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), out.address, 16);
  if (hex.empty() || ec != std::errc() || p != hex.data() + hex.size())
    throw FormatError("bad address in node id '" + std::string(id) + "'");
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string write_dot(const DotDocument& doc) {
  std::ostringstream os;
  os << "strict digraph " << quote(doc.name) << " {\n";
  if (doc.comment) os << "    comment=" << quote(format_comment(*doc.comment)) << "\n";
  for (const auto& n : doc.nodes) {
    const Style st = style_of(n.type);
    os << "    " << quote(n.id) << " [label=" << quote(n.label) << " color=" << quote(st.color) << " style=filled";
    if (st.shape) os << " shape=" << st.shape;
    if (n.key && n.type != NodeType::KN) os << " key=" << quote(std::string(1, *n.key));
    if (n.comment) os << " comment=" << quote(format_values(*n.comment));
    os << "];\n";
  }
  for (const auto& e : doc.edges) {
    os << "    " << quote(e.source) << " -> " << quote(e.target) << " [label=" << quote(to_string(e.type))
       << " weight=" << e.weight << "]\n";
  }
  os << "}\n";
  return os.str();
}

DotDocument parse_dot(std::string_view text) { return Parser(text).run(); }

DotDocument to_document(const MemGraph& g, const EmbeddingTable* table) {
  DotDocument doc;
  doc.name = g.file_id;
  if (table) doc.comment = GraphComment{std::string(to_string(table->type)), table->fields};
  doc.nodes.reserve(g.nodes.size());
  for (const auto& n : g.nodes) {
    DotNode d;
    d.id = n.id();
    d.type = n.type;
    d.address = n.address;
    d.key = n.key_letter;
    switch (n.type) {
      case NodeType::CHN: d.label = "CHN(" + std::to_string(n.chunk == kNoChunk ? 0 : n.chunk + 1) + ")"; break;
      case NodeType::KN: d.label = std::string("KN(") + n.key_letter.value_or('?') + ")"; break;
      default: d.label = std::string(to_string(n.type)); break;
    }
    if (table && n.type == NodeType::CHN && n.chunk < table->rows.size() && !table->rows[n.chunk].empty())
      d.comment = table->rows[n.chunk];
    doc.nodes.push_back(std::move(d));
  }
  for (const auto& e : g.edges)
    doc.edges.push_back({g.nodes[e.source].id(), g.nodes[e.target].id(), e.type, 1});
  return doc;
}

MemGraph to_memgraph(const DotDocument& doc) {
  MemGraph g;
  g.file_id = doc.name;
  std::map<std::string, std::size_t> index;
  auto add = [&](const std::string& id, const ParsedNodeId& pid, std::optional<char> key) {
    auto [it, inserted] = index.emplace(id, g.nodes.size());
    if (inserted) {
      Node n;
      n.type = pid.type;
      n.address = pid.address;
      n.key_letter = key;
      g.nodes.push_back(n);
    }
    return it->second;
  };
  for (const auto& n : doc.nodes) add(n.id, {n.type, n.key, n.address}, n.key);
  for (const auto& e : doc.edges) {
    auto s = parse_node_id(e.source);
    auto t = parse_node_id(e.target);
    std::size_t si = add(e.source, s, s.key);
    std::size_t ti = add(e.target, t, t.key);
    g.edges.push_back({si, ti, e.type});
  }
  g.chunk_only = !g.nodes.empty() && g.count(NodeType::CHN) == g.nodes.size();
  g.finalize();
  return g;
}

}  // namespace mem2graph
