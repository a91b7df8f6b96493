#pragma once

// Finite models: values of Bool, BitVec, uninterpreted and array sorts, and
// finite function tables.

#include "qsic/term.hpp"

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace qsic {

struct ArrayValue;

struct Value {
  Sort sort;
  std::uint64_t bits = 0; // Bool 0/1, bitvector value, uninterpreted element id
  std::shared_ptr<const ArrayValue> array; // set iff sort is an array sort
};

// Finite map with default. Keys are scalar index values (Bool, BitVec or
// uninterpreted); entries never repeat the default.
struct ArrayValue {
  Value default_value;
  std::map<std::uint64_t, Value> entries;
};

struct FunValue {
  FunSig sig;
  std::map<std::vector<std::uint64_t>, Value> table;
  Value default_value;
};

struct Model {
  std::map<std::string, Value, std::less<>> constants;
  std::map<std::string, FunValue, std::less<>> functions;

  const Value *find(std::string_view name) const {
    auto it = constants.find(name);
    return it == constants.end() ? nullptr : &it->second;
  }
  bool contains(std::string_view name) const {
    return constants.count(name) != 0 || functions.count(name) != 0;
  }
  void erase(std::string_view name);
};

Value bool_value(const TermStore &s, bool b);
Value bv_value(TermStore &s, std::uint64_t v, unsigned width);
Value const_array(Sort array_sort, Value element);
// Reads a[i] (i scalar).
const Value &array_read(const Value &a, std::uint64_t index);
// a[i := e], keeping the representation canonical.
Value array_write(const TermStore &s, const Value &a, std::uint64_t index, Value e);

// Default value of a sort: false, 0, element 0, constant-default array.
Value default_value(const TermStore &s, Sort sort);

// Extensional equality. Two array values with different defaults are equal
// only if their explicit entries cover the whole (finite) index domain.
bool values_equal(const TermStore &s, const Value &a, const Value &b);

// Number of elements of a scalar sort's domain as a power of two (bits), or
// -1 when infinite (uninterpreted sorts).
int domain_bits(const TermStore &s, Sort scalar);

// Renders a value as an SMT-LIB ground term.
std::string value_to_smt(const TermStore &s, const Value &v);

// Parses a get-model response ("(model ...)" or a bare list of define-fun
// forms; a leading sat line is tolerated). Store-chains over (as const ...),
// ite-ladders, as-array and lambda encodings are normalised to finite maps
// with a default. Auxiliary functions referenced via as-array are resolved
// and dropped from the result.
// Throws ParseError, Error(UnboundSymbol) or Error(ModelShape).
Model parse_model(TermStore &store, std::string_view text);

// Prints define-fun forms that parse_model reads back to an equal model.
std::string print_model(const TermStore &store, const Model &m);

} // namespace qsic
