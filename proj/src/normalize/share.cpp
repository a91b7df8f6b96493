#include "qsic/normalize.hpp"
#include "qsic/term_util.hpp"

#include <algorithm>

namespace qsic {

namespace {

bool is_binder(Op op) { return op == Op::Let || is_quantifier(op); }

class Sharer {
public:
  Sharer(TermStore &s, unsigned threshold) : s_(s), threshold_(std::max(2u, threshold)) {
    s_.symbols().reserve("qsic!t");
  }

  Term run(Term root) {
    // Collect the scope-local DAG, stopping at binders.
    std::vector<Term> order;
    TermMap<std::uint32_t> parents;
    TermSet seen;
    std::vector<std::pair<Term, bool>> st{{root, false}};
    while (!st.empty()) {
      auto [t, expanded] = st.back();
      st.pop_back();
      if (expanded) {
        order.push_back(t);
        continue;
      }
      if (!seen.insert(t).second)
        continue;
      st.emplace_back(t, true);
      if (is_binder(s_.op(t)))
        continue;
      for (Term k : s_.kids(t))
        if (!seen.count(k))
          st.emplace_back(k, false);
    }
    // occurrences as an argument, counted with multiplicity
    for (Term t : order) {
      if (is_binder(s_.op(t)))
        continue;
      for (Term k : s_.kids(t))
        ++parents[k];
    }

    auto shared = [&](Term t) {
      if (t == root)
        return false;
      const Op op = s_.op(t);
      if (op == Op::Const || op == Op::Var)
        return false;
      auto it = parents.find(t);
      return it != parents.end() && it->second >= threshold_;
    };

    // Rebuild bottom-up; shared nodes are replaced by their let name.
    TermMap<Term> rewritten; // node -> term with shared kids replaced
    TermMap<int> top_level;  // highest let level of shared nodes below (inclusive)
    std::vector<std::vector<std::pair<Term, Term>>> levels;
    std::vector<Term> kids;
    for (Term t : order) {
      const Op op = s_.op(t);
      if (is_binder(op)) {
        rewritten[t] = binder(t);
        top_level[t] = -1;
        continue;
      }
      int below = -1;
      kids.clear();
      for (Term k : s_.kids(t)) {
        kids.push_back(rewritten.at(k));
        below = std::max(below, top_level.at(k));
      }
      Term def = s_.rebuild(t, kids);
      if (shared(t)) {
        const int level = below + 1;
        if (levels.size() <= static_cast<std::size_t>(level))
          levels.resize(level + 1);
        Term v = s_.mk_var(s_.symbols().fresh("qsic!t"), s_.sort(t));
        levels[level].emplace_back(v, def);
        rewritten[t] = v;
        top_level[t] = level;
      } else {
        rewritten[t] = def;
        top_level[t] = below;
      }
    }

    Term body = rewritten.at(root);
    for (std::size_t l = levels.size(); l-- > 0;)
      body = s_.mk_let(levels[l], body);
    return body;
  }

private:
  Term binder(Term t) {
    auto kids = s_.kids(t);
    std::vector<Term> out(kids.begin(), kids.end());
    if (s_.op(t) == Op::Let) {
      for (std::size_t i = 1; i + 1 < out.size(); i += 2)
        out[i] = run(out[i]);
    }
    out.back() = run(out.back());
    return s_.rebuild(t, out);
  }

  TermStore &s_;
  unsigned threshold_;
};

} // namespace

Term share_subterms(TermStore &store, Term t, unsigned threshold) {
  return Sharer(store, threshold).run(t);
}

} // namespace qsic
