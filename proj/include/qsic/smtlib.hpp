#pragma once

// SMT-LIB 2 subset for (QF_)ABV/AUFBV: scripts in, scripts out.

#include "qsic/term.hpp"

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qsic {

struct Declaration {
  std::string name;
  FunSig sig;
};

struct Assertion {
  Term term;
  std::string name; // from (! t :named n), empty otherwise
};

struct Script {
  std::string logic; // empty when no set-logic was given
  std::vector<std::pair<std::string, std::string>> info;    // set-info keyword, raw value
  std::vector<std::pair<std::string, std::string>> options; // set-option keyword, raw value
  std::vector<std::string> sorts;                           // declare-sort (arity 0)
  std::vector<Declaration> decls;
  std::vector<Assertion> assertions;
  std::vector<std::string> commands; // check-sat, get-model, exit in input order

  // Raw set-info value for key (with the leading colon), or empty.
  std::string get_info(std::string_view key) const;
  void set_info(const std::string &key, const std::string &value);
};

// Logic strings accepted by parse_script.
bool supported_logic(std::string_view logic);

// Parses a script into store. Declarations are entered into store.symbols().
// Bound variables whose name clashes with a declared symbol or an enclosing
// binder are renamed with a fresh name. define-fun is inlined.
// Throws ParseError, or Error(Sort/UnsupportedSymbol/UnboundSymbol) with a
// "line:col: " prefix.
Script parse_script(TermStore &store, std::string_view text);

// Parses a single term against the declarations already in store, with the
// variables in bound visible by name.
Term parse_term(TermStore &store, std::string_view text, std::span<const Term> bound = {});

// Parses a sort; unknown sort symbols are taken as uninterpreted sorts.
Sort parse_sort(TermStore &store, std::string_view text);

struct PrintOptions {
  // Bind subterms occurring at least share_threshold times to let names
  // before printing (see share_subterms).
  bool share = true;
  unsigned share_threshold = 2;
};

std::string print_script(TermStore &store, const Script &script, PrintOptions opts = {});
std::string print_term(TermStore &store, Term t, PrintOptions opts = {.share = false});
std::string print_sort(const TermStore &store, Sort s);
// BV literal: #x... when width % 4 == 0, #b... otherwise.
std::string print_bv(std::uint64_t value, unsigned width);

// Conjunction of all assertions (true when there are none).
Term conjoin_assertions(TermStore &store, const Script &script);

} // namespace qsic
