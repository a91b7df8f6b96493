#pragma once

// Fixed-width bitvector arithmetic on uint64_t carriers (widths 1..64),
// following SMT-LIB semantics including division by zero.

#include "qsic/term.hpp"

#include <cstdint>
#include <span>

namespace qsic::bv {

inline std::uint64_t mask(unsigned w) { return w >= 64 ? ~0ULL : ((1ULL << w) - 1); }

inline std::int64_t to_signed(std::uint64_t v, unsigned w) {
  if (w >= 64)
    return static_cast<std::int64_t>(v);
  const std::uint64_t sign = 1ULL << (w - 1);
  return static_cast<std::int64_t>((v ^ sign) - sign);
}

inline bool msb(std::uint64_t v, unsigned w) { return (v >> (w - 1)) & 1ULL; }

// Applies a bitvector or comparison operator to constant operands. widths
// holds each operand's width, params the operator indices. The result is a
// masked bitvector value, or 0/1 for predicates.
std::uint64_t apply(Op op, std::span<const std::uint64_t> args, std::span<const unsigned> widths,
                    std::span<const unsigned> params, unsigned result_width);

bool is_bv_function(Op op); // operators handled by apply()

} // namespace qsic::bv
