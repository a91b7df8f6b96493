#include "qsic/bv.hpp"

namespace qsic::bv {

namespace {

std::uint64_t shl(std::uint64_t a, std::uint64_t b, unsigned w) {
  return b >= w ? 0 : (a << b) & mask(w);
}

std::uint64_t lshr(std::uint64_t a, std::uint64_t b, unsigned w) {
  return b >= w ? 0 : (a >> b);
}

std::uint64_t ashr(std::uint64_t a, std::uint64_t b, unsigned w) {
  if (b >= w)
    return msb(a, w) ? mask(w) : 0;
  const std::int64_t s = to_signed(a, w);
  return static_cast<std::uint64_t>(s >> b) & mask(w);
}

std::uint64_t udiv(std::uint64_t a, std::uint64_t b, unsigned w) {
  return b == 0 ? mask(w) : a / b;
}

std::uint64_t urem(std::uint64_t a, std::uint64_t b) { return b == 0 ? a : a % b; }

std::uint64_t neg(std::uint64_t a, unsigned w) { return (~a + 1) & mask(w); }

// SMT-LIB defines the signed operations through the unsigned ones on
// absolute values.
std::uint64_t sdiv(std::uint64_t a, std::uint64_t b, unsigned w) {
  const bool na = msb(a, w), nb = msb(b, w);
  const std::uint64_t ua = na ? neg(a, w) : a;
  const std::uint64_t ub = nb ? neg(b, w) : b;
  const std::uint64_t q = udiv(ua, ub, w);
  return (na != nb) ? neg(q, w) : q;
}

std::uint64_t srem(std::uint64_t a, std::uint64_t b, unsigned w) {
  const bool na = msb(a, w), nb = msb(b, w);
  const std::uint64_t ua = na ? neg(a, w) : a;
  const std::uint64_t ub = nb ? neg(b, w) : b;
  const std::uint64_t r = urem(ua, ub);
  return na ? neg(r, w) : r;
}

std::uint64_t smod(std::uint64_t a, std::uint64_t b, unsigned w) {
  const bool na = msb(a, w), nb = msb(b, w);
  const std::uint64_t ua = na ? neg(a, w) : a;
  const std::uint64_t ub = nb ? neg(b, w) : b;
  const std::uint64_t u = urem(ua, ub);
  if (u == 0)
    return u;
  if (!na && !nb)
    return u;
  if (na && !nb)
    return (neg(u, w) + b) & mask(w);
  if (!na && nb)
    return (u + b) & mask(w);
  return neg(u, w);
}

std::uint64_t rotl(std::uint64_t a, unsigned k, unsigned w) {
  k %= w;
  if (k == 0)
    return a;
  return ((a << k) | (a >> (w - k))) & mask(w);
}

} // namespace

bool is_bv_function(Op op) {
  switch (op) {
  case Op::BvNot: case Op::BvNeg: case Op::BvAnd: case Op::BvOr: case Op::BvXor:
  case Op::BvNand: case Op::BvNor: case Op::BvXnor: case Op::BvAdd: case Op::BvSub:
  case Op::BvMul: case Op::BvUdiv: case Op::BvUrem: case Op::BvSdiv: case Op::BvSrem:
  case Op::BvSmod: case Op::BvShl: case Op::BvLshr: case Op::BvAshr: case Op::BvComp:
  case Op::Concat: case Op::Extract: case Op::ZeroExtend: case Op::SignExtend:
  case Op::RotateLeft: case Op::RotateRight: case Op::Repeat: case Op::BvUlt:
  case Op::BvUle: case Op::BvUgt: case Op::BvUge: case Op::BvSlt: case Op::BvSle:
  case Op::BvSgt: case Op::BvSge:
    return true;
  default:
    return false;
  }
}

std::uint64_t apply(Op op, std::span<const std::uint64_t> args, std::span<const unsigned> widths,
                    std::span<const unsigned> params, unsigned result_width) {
  const unsigned w = widths.empty() ? result_width : widths[0];
  const std::uint64_t m = mask(result_width);
  auto a = [&] { return args[0]; };
  auto b = [&] { return args[1]; };
  switch (op) {
  case Op::BvNot: return ~a() & m;
  case Op::BvNeg: return neg(a(), w);
  case Op::BvAnd: return a() & b();
  case Op::BvOr: return a() | b();
  case Op::BvXor: return a() ^ b();
  case Op::BvNand: return ~(a() & b()) & m;
  case Op::BvNor: return ~(a() | b()) & m;
  case Op::BvXnor: return ~(a() ^ b()) & m;
  case Op::BvAdd: return (a() + b()) & m;
  case Op::BvSub: return (a() - b()) & m;
  case Op::BvMul: return (a() * b()) & m;
  case Op::BvUdiv: return udiv(a(), b(), w);
  case Op::BvUrem: return urem(a(), b());
  case Op::BvSdiv: return sdiv(a(), b(), w);
  case Op::BvSrem: return srem(a(), b(), w);
  case Op::BvSmod: return smod(a(), b(), w);
  case Op::BvShl: return shl(a(), b(), w);
  case Op::BvLshr: return lshr(a(), b(), w);
  case Op::BvAshr: return ashr(a(), b(), w);
  case Op::BvComp: return a() == b() ? 1 : 0;
  case Op::Concat: return ((a() << widths[1]) | b()) & m;
  case Op::Extract: return (a() >> params[1]) & m;
  case Op::ZeroExtend: return a();
  case Op::SignExtend:
    return msb(a(), w) ? (a() | (m & ~mask(w))) : a();
  case Op::RotateLeft: return rotl(a(), params[0], w);
  case Op::RotateRight: return rotl(a(), w - (params[0] % w), w);
  case Op::Repeat: {
    std::uint64_t r = 0;
    for (unsigned i = 0; i < params[0]; ++i)
      r = (w >= 64 ? 0 : (r << w)) | a();
    return r & m;
  }
  case Op::BvUlt: return a() < b();
  case Op::BvUle: return a() <= b();
  case Op::BvUgt: return a() > b();
  case Op::BvUge: return a() >= b();
  case Op::BvSlt: return to_signed(a(), w) < to_signed(b(), w);
  case Op::BvSle: return to_signed(a(), w) <= to_signed(b(), w);
  case Op::BvSgt: return to_signed(a(), w) > to_signed(b(), w);
  case Op::BvSge: return to_signed(a(), w) >= to_signed(b(), w);
  default:
    throw Error(ErrorKind::Internal, "bv::apply on non-bitvector operator");
  }
}

} // namespace qsic::bv
