#ifndef PCOL_CKKS_POLY_H_
#define PCOL_CKKS_POLY_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pcol/ckks/params.h"

namespace pcol::ckks {

// Ring element in residue form: components q_0 .. q_{num_q-1}, optionally
// followed by the special prime. Stored flat, component-major.
class RnsPoly {
 public:
  RnsPoly() = default;
  RnsPoly(std::size_t n, std::size_t num_q, bool special, bool ntt_form);

  std::size_t n() const { return n_; }
  std::size_t num_q() const { return num_q_; }
  bool has_special() const { return special_; }
  bool is_ntt() const { return ntt_; }
  std::size_t components() const { return num_q_ + (special_ ? 1 : 0); }
  bool empty() const { return n_ == 0; }

  // Context component index of local component c.
  std::size_t ContextIndex(const Context& ctx, std::size_t c) const {
    return c < num_q_ ? c : ctx.special_index();
  }

  std::span<std::uint64_t> operator[](std::size_t c) {
    return {data_.data() + c * n_, n_};
  }
  std::span<const std::uint64_t> operator[](std::size_t c) const {
    return {data_.data() + c * n_, n_};
  }
  std::vector<std::uint64_t>& data() { return data_; }
  const std::vector<std::uint64_t>& data() const { return data_; }

  void set_ntt(bool ntt_form) { ntt_ = ntt_form; }

  friend bool operator==(const RnsPoly&, const RnsPoly&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t num_q_ = 0;
  bool special_ = false;
  bool ntt_ = false;
  std::vector<std::uint64_t> data_;
};

// Signed small-coefficient polynomial lifted into residue form.
RnsPoly FromSigned(const Context& ctx, std::span<const std::int64_t> coeffs,
                   std::size_t num_q, bool special, bool to_ntt);

void ToNtt(const Context& ctx, RnsPoly& p);
void FromNtt(const Context& ctx, RnsPoly& p);

void AddInPlace(const Context& ctx, RnsPoly& a, const RnsPoly& b);
void SubInPlace(const Context& ctx, RnsPoly& a, const RnsPoly& b);
void NegateInPlace(const Context& ctx, RnsPoly& a);
// Pointwise product; both operands in NTT form.
RnsPoly Mul(const Context& ctx, const RnsPoly& a, const RnsPoly& b);
void MulAddInPlace(const Context& ctx, RnsPoly& acc, const RnsPoly& a, const RnsPoly& b);
// Multiplies every component by a signed integer constant.
void MulScalarInPlace(const Context& ctx, RnsPoly& a, __int128 k);
// Adds a constant polynomial k (valid in either form).
void AddConstantInPlace(const Context& ctx, RnsPoly& a, __int128 k);

// Keeps the first num_q chain components (and the special one if `special`).
RnsPoly Restrict(const RnsPoly& a, std::size_t num_q, bool special);

// X -> X^galois on an NTT-form polynomial.
RnsPoly ApplyGalois(const RnsPoly& a, const std::vector<std::size_t>& perm);

// Divides by the top chain prime with rounding: (a - [a]_top) / q_top.
// Input is NTT form with at least two chain components and no special one.
void RescaleInPlace(const Context& ctx, RnsPoly& a);

// Divides a (chain components 0..num_q-1 plus special) by the special prime
// with rounding, dropping the special component.
void ModDownInPlace(const Context& ctx, RnsPoly& a);

// Centered integer value of each coefficient (coefficient form), as long
// double. Exact for magnitudes below 2^63; otherwise correct to 64 bits.
std::vector<long double> CenteredLift(const Context& ctx, const RnsPoly& coeff_form);

// Centered lift reduced modulo 2^128 and interpreted as signed. Exact when
// the centered value lies in (-2^127, 2^127).
std::vector<__int128> CenteredLift128(const Context& ctx, const RnsPoly& coeff_form);

}  // namespace pcol::ckks

#endif  // PCOL_CKKS_POLY_H_
