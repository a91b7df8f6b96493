#include "qsic/sexpr.hpp"
#include "qsic/sic.hpp"

#include <algorithm>
#include <set>

namespace qsic {

namespace {

[[noreturn]] void malformed(const AbsorptionRule &r, const std::string &why) {
  throw Error(ErrorKind::MalformedRule,
              "absorption rule for '" + r.symbol + "/" + std::to_string(r.arity) + "': " + why);
}

// Position k of a "$k" placeholder, or 0.
unsigned placeholder(const SExprArena &ar, std::uint32_t id) {
  const SNode &n = ar[id];
  if (n.kind != SKind::Symbol || n.quoted || n.text.size() < 2 || n.text[0] != '$')
    return 0;
  unsigned k = 0;
  for (std::size_t i = 1; i < n.text.size(); ++i) {
    if (n.text[i] < '0' || n.text[i] > '9' || k > 100000)
      return 0;
    k = k * 10 + static_cast<unsigned>(n.text[i] - '0');
  }
  return k;
}

} // namespace

void validate_rule(const AbsorptionRule &r) {
  if (r.symbol.empty())
    malformed(r, "empty symbol");
  if (r.arity == 0)
    malformed(r, "arity must be positive");
  if (r.support.empty())
    malformed(r, "empty support");
  std::set<unsigned> support;
  for (unsigned i : r.support) {
    if (i < 1 || i > r.arity)
      malformed(r, "support index " + std::to_string(i) + " out of range 1.." +
                       std::to_string(r.arity));
    if (!support.insert(i).second)
      malformed(r, "support index " + std::to_string(i) + " repeated");
  }
  SExprArena ar;
  std::vector<std::uint32_t> top;
  try {
    top = ar.read(r.relation);
  } catch (const Error &e) {
    malformed(r, std::string("relation does not parse: ") + e.what());
  }
  if (top.size() != 1)
    malformed(r, "relation must be a single term");
  for (std::uint32_t id = 0; id < ar.size(); ++id) {
    const SNode &n = ar[id];
    if (n.kind == SKind::List && n.items.size() >= 1 &&
        (ar.is_symbol(n.items[0], "zeros") || ar.is_symbol(n.items[0], "ones") ||
         ar.is_symbol(n.items[0], "width"))) {
      if (n.items.size() != 2 || placeholder(ar, n.items[1]) == 0)
        malformed(r, "macro " + ar.to_text(id) + " takes one placeholder");
    }
    if (n.kind == SKind::Symbol && !n.quoted && !n.text.empty() && n.text[0] == '$') {
      const unsigned k = placeholder(ar, id);
      if (k == 0 || k > r.arity)
        malformed(r, "bad placeholder '" + n.text + "'");
      if (!support.count(k))
        malformed(r, "relation mentions $" + std::to_string(k) + " outside the support");
    }
  }
}

void AbsorptionRegistry::add(AbsorptionRule rule) {
  validate_rule(rule);
  rules_.push_back(std::move(rule));
}

void AbsorptionRegistry::add_absorbing_element(std::string symbol, std::string element) {
  AbsorptionRule probe{symbol, 1, {1}, "(= $1 " + element + ")"};
  for (std::size_t p; (p = probe.relation.find("$i")) != std::string::npos;)
    probe.relation.replace(p, 2, "$1");
  validate_rule(probe);
  elements_.emplace_back(std::move(symbol), std::move(element));
}

std::vector<AbsorptionRule> AbsorptionRegistry::rules(std::string_view symbol,
                                                      unsigned arity) const {
  std::vector<AbsorptionRule> out;
  for (const auto &[sym, element] : elements_) {
    if (sym != symbol)
      continue;
    for (unsigned i = 1; i <= arity; ++i) {
      const std::string pos = "$" + std::to_string(i);
      std::string rel = "(= " + pos + " " + element + ")";
      for (std::size_t p; (p = rel.find("$i")) != std::string::npos;)
        rel.replace(p, 2, pos);
      out.push_back(AbsorptionRule{sym, arity, {i}, std::move(rel)});
    }
  }
  for (const auto &r : rules_)
    if (r.symbol == symbol && r.arity == arity)
      out.push_back(r);
  return out;
}

AbsorptionRegistry AbsorptionRegistry::builtin() {
  AbsorptionRegistry r;
  r.add_absorbing_element("and", "false");
  r.add_absorbing_element("or", "true");
  r.add_absorbing_element("bvand", "(zeros $i)");
  r.add_absorbing_element("bvor", "(ones $i)");
  r.add_absorbing_element("bvmul", "(zeros $i)");
  r.add({"=>", 2, {1}, "(= $1 false)"});
  r.add({"=>", 2, {2}, "(= $2 true)"});
  r.add({"bvshl", 2, {2}, "(bvuge $2 (width $2))"});
  return r;
}

AbsorptionRegistry AbsorptionRegistry::parse(std::string_view text) {
  AbsorptionRegistry reg;
  reg.add_text(text);
  return reg;
}

void AbsorptionRegistry::add_text(std::string_view text) {
  SExprArena ar;
  for (std::uint32_t top : ar.read(text)) {
    const SNode &n = ar[top];
    auto bad = [&](const std::string &msg) -> void {
      throw Error(ErrorKind::MalformedRule,
                  std::to_string(n.line) + ":" + std::to_string(n.col) + ": " + msg);
    };
    if (n.kind != SKind::List || n.items.size() != 5 || !ar.is_symbol(n.items[0], "absorb"))
      bad("expected (absorb <symbol> <arity> (<index> ...) <relation>)");
    AbsorptionRule r;
    if (ar[n.items[1]].kind != SKind::Symbol)
      bad("expected a function symbol");
    r.symbol = ar[n.items[1]].text;
    if (ar[n.items[2]].kind != SKind::Numeral || ar[n.items[2]].text.size() > 6)
      bad("expected an arity");
    r.arity = static_cast<unsigned>(std::stoul(ar[n.items[2]].text));
    const SNode &sup = ar[n.items[3]];
    if (sup.kind != SKind::List)
      bad("expected a support list");
    for (std::uint32_t i : sup.items) {
      if (ar[i].kind != SKind::Numeral || ar[i].text.size() > 6)
        bad("support entries are positions");
      r.support.push_back(static_cast<unsigned>(std::stoul(ar[i].text)));
    }
    r.relation = ar.to_text(n.items[4]);
    add(std::move(r));
  }
}

} // namespace qsic
