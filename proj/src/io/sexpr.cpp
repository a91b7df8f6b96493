#include "qsic/sexpr.hpp"

#include "qsic/error.hpp"

#include <cctype>

namespace qsic {

namespace {

bool symbol_char(char c) {
  if (std::isalnum(static_cast<unsigned char>(c)))
    return true;
  switch (c) {
  case '~': case '!': case '@': case '$': case '%': case '^': case '&': case '*':
  case '_': case '-': case '+': case '=': case '<': case '>': case '.': case '?':
  case '/':
    return true;
  default:
    return false;
  }
}

const char *reserved_words[] = {"let", "forall", "exists", "match", "par", "_", "!", "as",
                                "BINARY", "DECIMAL", "HEXADECIMAL", "NUMERAL", "STRING"};

} // namespace

bool is_simple_symbol(std::string_view name) {
  if (name.empty() || std::isdigit(static_cast<unsigned char>(name[0])))
    return false;
  for (char c : name)
    if (!symbol_char(c))
      return false;
  for (const char *r : reserved_words)
    if (name == r)
      return false;
  return true;
}

std::string quote_symbol(std::string_view name) {
  if (is_simple_symbol(name))
    return std::string(name);
  return "|" + std::string(name) + "|";
}

std::vector<std::uint32_t> SExprArena::read(std::string_view text) {
  std::vector<std::uint32_t> top;
  std::vector<std::uint32_t> open;
  std::size_t i = 0, line = 1, col = 1;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto add = [&](SNode node) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(std::move(node));
    if (open.empty())
      top.push_back(id);
    else
      nodes_[open.back()].items.push_back(id);
    return id;
  };

  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == ';') {
      while (i < text.size() && text[i] != '\n')
        advance(1);
      continue;
    }
    SNode node;
    node.line = static_cast<std::uint32_t>(line);
    node.col = static_cast<std::uint32_t>(col);
    if (c == '(') {
      node.kind = SKind::List;
      open.push_back(add(std::move(node)));
      advance(1);
      continue;
    }
    if (c == ')') {
      if (open.empty())
        throw ParseError(line, col, "unexpected ')'");
      open.pop_back();
      advance(1);
      continue;
    }
    if (c == '|') {
      const std::size_t end = text.find('|', i + 1);
      if (end == std::string_view::npos)
        throw ParseError(line, col, "unterminated quoted symbol");
      node.kind = SKind::Symbol;
      node.quoted = true;
      node.text = std::string(text.substr(i + 1, end - i - 1));
      add(std::move(node));
      advance(end + 1 - i);
      continue;
    }
    if (c == '"') {
      std::size_t j = i + 1;
      std::string s;
      for (;;) {
        if (j >= text.size())
          throw ParseError(line, col, "unterminated string literal");
        if (text[j] == '"') {
          if (j + 1 < text.size() && text[j + 1] == '"') {
            s += '"';
            j += 2;
            continue;
          }
          break;
        }
        s += text[j++];
      }
      node.kind = SKind::String;
      node.text = std::move(s);
      add(std::move(node));
      advance(j + 1 - i);
      continue;
    }
    if (c == '#') {
      if (i + 1 >= text.size() || (text[i + 1] != 'x' && text[i + 1] != 'b'))
        throw ParseError(line, col, "expected #x or #b literal");
      const bool hex = text[i + 1] == 'x';
      std::size_t j = i + 2;
      while (j < text.size() && (hex ? std::isxdigit(static_cast<unsigned char>(text[j]))
                                     : (text[j] == '0' || text[j] == '1')))
        ++j;
      if (j == i + 2)
        throw ParseError(line, col, "empty bitvector literal");
      node.kind = hex ? SKind::Hex : SKind::Binary;
      node.text = std::string(text.substr(i + 2, j - i - 2));
      add(std::move(node));
      advance(j - i);
      continue;
    }
    std::size_t j = i;
    if (c == ':') {
      ++j;
      node.kind = SKind::Keyword;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      node.kind = SKind::Numeral;
    } else if (symbol_char(c)) {
      node.kind = SKind::Symbol;
    } else {
      throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
    while (j < text.size() && symbol_char(text[j]))
      ++j;
    node.text = std::string(text.substr(i, j - i));
    if (node.kind == SKind::Numeral) {
      for (char d : node.text)
        if (!std::isdigit(static_cast<unsigned char>(d)))
          throw ParseError(line, col, "malformed numeral '" + node.text + "'");
    }
    add(std::move(node));
    advance(j - i);
  }
  if (!open.empty()) {
    const SNode &n = nodes_[open.back()];
    throw ParseError(n.line, n.col, "unbalanced '(': missing ')'");
  }
  return top;
}

std::string SExprArena::to_text(std::uint32_t id) const {
  std::string out;
  // (node, next child) stack
  std::vector<std::pair<std::uint32_t, std::size_t>> st{{id, 0}};
  while (!st.empty()) {
    auto &[n, k] = st.back();
    const SNode &node = nodes_[n];
    if (node.kind != SKind::List) {
      switch (node.kind) {
      case SKind::Symbol: out += node.quoted ? "|" + node.text + "|" : node.text; break;
      case SKind::Hex: out += "#x" + node.text; break;
      case SKind::Binary: out += "#b" + node.text; break;
      case SKind::String: {
        out += '"';
        for (char ch : node.text)
          out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        out += '"';
        break;
      }
      default: out += node.text; break;
      }
      st.pop_back();
      continue;
    }
    if (k == 0)
      out += '(';
    if (k < node.items.size()) {
      if (k > 0)
        out += ' ';
      const std::uint32_t child = node.items[k++];
      st.emplace_back(child, 0);
      continue;
    }
    out += ')';
    st.pop_back();
  }
  return out;
}

} // namespace qsic
