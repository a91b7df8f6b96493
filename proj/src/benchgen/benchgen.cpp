#include "qsic/benchgen.hpp"

#include "qsic/error.hpp"
#include "qsic/term_util.hpp"

#include <algorithm>
#include <fnmatch.h>
#include <random>
#include <set>

namespace qsic {

QuantifyPlan::Select parse_selection(const std::string &text, QuantifyPlan &plan) {
  if (text == "unwritten")
    return plan.select = QuantifyPlan::Select::Unwritten;
  if (text == "all")
    return plan.select = QuantifyPlan::Select::All;
  if (text.rfind("count:", 0) == 0) {
    const std::string n = text.substr(6);
    if (n.empty() || n.size() > 6 || n.find_first_not_of("0123456789") != std::string::npos)
      throw Error(ErrorKind::InvalidArgument, "bad selection '" + text + "'");
    plan.count = static_cast<unsigned>(std::stoul(n));
    return plan.select = QuantifyPlan::Select::Count;
  }
  plan.names.clear();
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    if (comma > start)
      plan.names.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
  if (plan.names.empty())
    throw Error(ErrorKind::InvalidArgument, "empty selection");
  return plan.select = QuantifyPlan::Select::Names;
}

namespace {

// Array constants equated with a non-variable array term (a store chain, an
// ite, ...): in SSA-style memory encodings those are the written states.
std::set<std::string> written_arrays(TermStore &s, const Script &sc) {
  std::set<std::string> out;
  std::vector<Term> roots;
  for (const Assertion &a : sc.assertions)
    roots.push_back(expand_lets(s, a.term));
  post_order(s, roots, [&](Term t) {
    if (s.op(t) != Op::Eq || !s.is_array(s.sort(s.kid(t, 0))))
      return;
    bool has_compound = false;
    for (Term k : s.kids(t))
      has_compound = has_compound || !s.is_var(k);
    if (!has_compound)
      return;
    for (Term k : s.kids(t))
      if (s.is_var(k))
        out.insert(std::string(s.name(k)));
  });
  return out;
}

} // namespace

std::vector<std::string> select_arrays(TermStore &s, const Script &sc, const QuantifyPlan &plan) {
  std::vector<std::string> arrays;
  for (const Declaration &d : sc.decls)
    if (d.sig.domain.empty() && s.is_array(d.sig.range))
      arrays.push_back(d.name);

  std::vector<std::string> out;
  switch (plan.select) {
  case QuantifyPlan::Select::All:
    out = arrays;
    break;
  case QuantifyPlan::Select::Unwritten: {
    const auto written = written_arrays(s, sc);
    for (const std::string &a : arrays)
      if (!written.count(a))
        out.push_back(a);
    break;
  }
  case QuantifyPlan::Select::Names:
    for (const std::string &a : arrays)
      for (const std::string &pat : plan.names)
        if (::fnmatch(pat.c_str(), a.c_str(), 0) == 0) {
          out.push_back(a);
          break;
        }
    break;
  case QuantifyPlan::Select::Count: {
    std::vector<std::size_t> idx(arrays.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      idx[i] = i;
    // Fisher-Yates with an explicit draw so the order is library-independent
    std::mt19937_64 rng(plan.seed);
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng() % i]);
    idx.resize(std::min<std::size_t>(plan.count, idx.size()));
    std::sort(idx.begin(), idx.end());
    for (std::size_t i : idx)
      out.push_back(arrays[i]);
    break;
  }
  }
  if (out.size() < plan.min_selected)
    throw Error(ErrorKind::NoArraySymbols, "selected " + std::to_string(out.size()) +
                                               " array symbols, need at least " +
                                               std::to_string(plan.min_selected));
  return out;
}

Script quantify_arrays(TermStore &s, const Script &sc, const QuantifyPlan &plan) {
  for (const Assertion &a : sc.assertions)
    if (has_quantifier(s, a.term))
      throw Error(ErrorKind::InvalidArgument, "benchgen needs a quantifier-free script");
  const std::vector<std::string> chosen = select_arrays(s, sc, plan);
  if (chosen.empty())
    return sc;

  Script out = sc;
  std::vector<Term> vars;
  out.decls.clear();
  for (const Declaration &d : sc.decls) {
    if (std::find(chosen.begin(), chosen.end(), d.name) != chosen.end())
      vars.push_back(s.mk_var(d.name, d.sig.range));
    else
      out.decls.push_back(d);
  }
  out.assertions = {{s.mk_quant(Op::Forall, vars, conjoin_assertions(s, sc)), {}}};
  if (out.logic.rfind("QF_", 0) == 0)
    out.logic = out.logic.substr(3);
  return out;
}

} // namespace qsic
