#include "qsic/pipeline.hpp"

#include "qsic/term_util.hpp"

#include <algorithm>
#include <chrono>

namespace qsic {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

SkolemLoop skolemize_iteratively(TermStore &s, const PrenexForm &input) {
  SkolemLoop out;
  PrenexForm pf = input;
  while (!pf.blocks.empty()) {
    if (pf.blocks.front().kind == Op::Exists) {
      pf = skolemize_head(s, pf, &out.skolems);
      continue;
    }
    // Universal head: its variables become targets and the block goes away.
    for (Term v : pf.blocks.front().vars)
      out.eliminated.push_back(v);
    pf.blocks.erase(pf.blocks.begin());
    ++out.rounds;
  }
  out.matrix = pf.matrix;
  return out;
}

Preprocessed preprocess(TermStore &s, const Script &input, const PreprocessOptions &opts) {
  static const AbsorptionRegistry kBuiltin = AbsorptionRegistry::builtin();
  const AbsorptionRegistry &reg = opts.registry ? *opts.registry : kBuiltin;

  Preprocessed out;
  const PrenexForm pf = prenex(s, conjoin_assertions(s, input));
  SkolemLoop loop = skolemize_iteratively(s, pf);
  out.rounds = loop.rounds;
  out.eliminated = loop.eliminated;
  out.skolems = loop.skolems;
  for (Term v : out.eliminated) {
    const std::string name(s.name(v));
    if (!s.symbols().declared(name))
      s.symbols().declare(name, FunSig{{}, s.sort(v)});
  }

  // All universal variables are targets of one inference: independence from
  // one block alone does not give independence from all of them jointly.
  out.targets.insert(out.eliminated.begin(), out.eliminated.end());
  for (const std::string &name : opts.targets) {
    Term hit;
    for (Term v : out.eliminated)
      if (s.name(v) == name)
        hit = v;
    if (!hit) {
      const FunSig *sig = s.symbols().lookup(name);
      if (!sig || !sig->domain.empty())
        throw Error(ErrorKind::InvalidArgument,
                    "target '" + name + "' is neither a universal variable nor a declared constant");
      hit = s.mk_var(name, sig->range);
    }
    out.targets.insert(hit);
  }
  if (!opts.targets.empty()) {
    for (Term v : out.eliminated)
      if (std::find(opts.targets.begin(), opts.targets.end(), s.name(v)) == opts.targets.end())
        throw Error(ErrorKind::InvalidArgument,
                    "universal variable '" + std::string(s.name(v)) +
                        "' must be a target (it is eliminated from the output)");
  }

  auto t0 = std::chrono::steady_clock::now();
  out.matrix = expand_lets(s, loop.matrix);
  if (opts.simplify)
    out.matrix = simplify(s, out.matrix);
  out.simplify_seconds += seconds_since(t0);

  SicEngine engine(s, reg, out.targets, opts.sic);
  t0 = std::chrono::steady_clock::now();
  if (auto trivial = detect_trivial_wic(s, out.matrix, out.targets)) {
    out.raw_sic = trivial->formula;
    out.is_wic = true;
    out.trivial_wic = true;
  } else {
    SicResult r = engine.infer(out.matrix);
    out.raw_sic = r.formula;
    out.is_wic = r.is_wic;
  }
  out.taint_seconds = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  out.sic = opts.simplify ? simplify(s, out.raw_sic) : out.raw_sic;
  out.simplify_seconds += seconds_since(t0);
  // true is the weakest formula, so a SIC that simplifies to it is a WIC.
  if (s.is_true(out.sic))
    out.is_wic = true;

  out.bound = measure_size_bound(engine, out.matrix, out.raw_sic);
  out.shadows = engine.shadows();
  if (s.is_true(out.sic))
    out.output = out.matrix;
  else if (s.is_true(out.matrix))
    out.output = out.sic;
  else
    out.output = s.mk(Op::And, {out.matrix, out.sic});
  return out;
}

Script output_script(TermStore &s, const Script &input, const Preprocessed &pre) {
  Script out;
  out.info = input.info;
  out.options = input.options;
  out.sorts = input.sorts;
  out.decls = input.decls;
  auto declare = [&](Term v) { out.decls.push_back({std::string(s.name(v)), FunSig{{}, s.sort(v)}}); };
  for (Term v : pre.eliminated)
    declare(v);
  for (const Skolem &k : pre.skolems)
    declare(k.constant);
  for (const ShadowArray &sh : pre.shadows)
    declare(sh.shadow);

  bool has_uf = false;
  for (const auto &d : out.decls)
    has_uf = has_uf || !d.sig.domain.empty();
  out.logic = has_uf ? "QF_AUFBV" : "QF_ABV";

  if (!s.is_true(pre.matrix) || s.is_true(pre.sic))
    out.assertions.push_back({pre.matrix, {}});
  if (!s.is_true(pre.sic))
    out.assertions.push_back({pre.sic, {}});
  out.commands = input.commands;
  if (out.commands.empty())
    out.commands.push_back("check-sat");
  return out;
}

} // namespace qsic
