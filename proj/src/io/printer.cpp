#include "qsic/normalize.hpp"
#include "qsic/sexpr.hpp"
#include "qsic/smtlib.hpp"

#include <variant>

namespace qsic {

std::string print_bv(std::uint64_t value, unsigned width) {
  static const char digits[] = "0123456789abcdef";
  std::string out;
  if (width % 4 == 0) {
    out = "#x";
    for (unsigned i = width / 4; i-- > 0;)
      out += digits[(value >> (4 * i)) & 0xf];
  } else {
    out = "#b";
    for (unsigned i = width; i-- > 0;)
      out += ((value >> i) & 1) ? '1' : '0';
  }
  return out;
}

std::string print_sort(const TermStore &store, Sort s) { return store.to_string(s); }

namespace {

void emit_term(const TermStore &s, Term root, std::string &out) {
  using Item = std::variant<Term, const char *, std::string>;
  std::vector<Item> st{root};
  std::vector<Item> tmp;

  while (!st.empty()) {
    Item item = std::move(st.back());
    st.pop_back();
    if (auto *lit = std::get_if<const char *>(&item)) {
      out += *lit;
      continue;
    }
    if (auto *str = std::get_if<std::string>(&item)) {
      out += *str;
      continue;
    }
    const Term t = std::get<Term>(item);
    const Op op = s.op(t);
    auto kids = s.kids(t);
    tmp.clear();
    switch (op) {
    case Op::Const:
      if (s.is_bool(s.sort(t)))
        out += s.is_true(t) ? "true" : "false";
      else
        out += print_bv(s.value(t), s.width(s.sort(t)));
      continue;
    case Op::Var:
      out += quote_symbol(s.name(t));
      continue;
    case Op::ConstArray:
      tmp.push_back("((as const " + s.to_string(s.sort(t)) + ") ");
      tmp.push_back(kids[0]);
      tmp.push_back(")");
      break;
    case Op::Let:
      tmp.push_back("(let (");
      for (std::size_t i = 0; i + 1 < kids.size(); i += 2) {
        tmp.push_back((i ? " (" : "(") + quote_symbol(s.name(kids[i])) + " ");
        tmp.push_back(kids[i + 1]);
        tmp.push_back(")");
      }
      tmp.push_back(") ");
      tmp.push_back(kids.back());
      tmp.push_back(")");
      break;
    case Op::Forall:
    case Op::Exists: {
      std::string head = op == Op::Forall ? "(forall (" : "(exists (";
      auto vars = s.bound_vars(t);
      for (std::size_t i = 0; i < vars.size(); ++i)
        head += (i ? " (" : "(") + quote_symbol(s.name(vars[i])) + " " +
                s.to_string(s.sort(vars[i])) + ")";
      tmp.push_back(head + ") ");
      tmp.push_back(kids.back());
      tmp.push_back(")");
      break;
    }
    default: {
      std::string head = "(";
      if (op == Op::Apply) {
        head += quote_symbol(s.name(t));
      } else if (is_indexed(op)) {
        head += "(_ " + std::string(op_name(op));
        for (unsigned p : s.params(t))
          head += " " + std::to_string(p);
        head += ")";
      } else {
        head += op_name(op);
      }
      tmp.push_back(std::move(head));
      for (Term k : kids) {
        tmp.push_back(" ");
        tmp.push_back(k);
      }
      tmp.push_back(")");
      break;
    }
    }
    for (auto it = tmp.rbegin(); it != tmp.rend(); ++it)
      st.push_back(std::move(*it));
  }
}

} // namespace

std::string print_term(TermStore &store, Term t, PrintOptions opts) {
  if (opts.share)
    t = share_subterms(store, t, opts.share_threshold);
  std::string out;
  emit_term(store, t, out);
  return out;
}

std::string print_script(TermStore &store, const Script &script, PrintOptions opts) {
  std::string out;
  if (!script.logic.empty())
    out += "(set-logic " + script.logic + ")\n";
  for (const auto &[k, v] : script.info)
    out += "(set-info " + k + (v.empty() ? "" : " " + v) + ")\n";
  for (const auto &[k, v] : script.options)
    out += "(set-option " + k + (v.empty() ? "" : " " + v) + ")\n";
  for (const auto &srt : script.sorts)
    out += "(declare-sort " + quote_symbol(srt) + " 0)\n";
  for (const auto &d : script.decls) {
    out += "(declare-fun " + quote_symbol(d.name) + " (";
    for (std::size_t i = 0; i < d.sig.domain.size(); ++i)
      out += (i ? " " : "") + store.to_string(d.sig.domain[i]);
    out += ") " + store.to_string(d.sig.range) + ")\n";
  }
  for (const auto &a : script.assertions) {
    const Term t = opts.share ? share_subterms(store, a.term, opts.share_threshold) : a.term;
    out += "(assert ";
    if (!a.name.empty())
      out += "(! ";
    emit_term(store, t, out);
    if (!a.name.empty())
      out += " :named " + quote_symbol(a.name) + ")";
    out += ")\n";
  }
  for (const auto &c : script.commands)
    out += "(" + c + ")\n";
  return out;
}

} // namespace qsic
