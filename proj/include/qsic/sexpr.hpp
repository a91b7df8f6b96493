#pragma once

// Flat s-expression reader for SMT-LIB text. Nodes live in one arena so deep
// inputs neither recurse on the reader nor on destruction.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qsic {

enum class SKind : std::uint8_t { List, Symbol, Keyword, Numeral, Hex, Binary, String };

struct SNode {
  SKind kind;
  bool quoted = false; // symbol written as |...|
  std::uint32_t line = 0, col = 0;
  std::string text;                  // atoms: symbol without bars, digits without #x/#b
  std::vector<std::uint32_t> items;  // lists: child node ids
};

class SExprArena {
public:
  // Reads every top-level expression of text. Throws ParseError.
  std::vector<std::uint32_t> read(std::string_view text);

  const SNode &operator[](std::uint32_t id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }

  bool is_symbol(std::uint32_t id, std::string_view name) const {
    const SNode &n = nodes_[id];
    return n.kind == SKind::Symbol && !n.quoted && n.text == name;
  }

  // Renders a node back to text (used for attribute values we only carry).
  std::string to_text(std::uint32_t id) const;

private:
  std::vector<SNode> nodes_;
};

// True if name can be printed without |bars|.
bool is_simple_symbol(std::string_view name);
// name, or |name| when it needs quoting.
std::string quote_symbol(std::string_view name);

} // namespace qsic
