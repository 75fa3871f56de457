#ifndef PCOL_CKKS_ENCODER_H_
#define PCOL_CKKS_ENCODER_H_

#include <complex>
#include <span>
#include <vector>

#include "pcol/ckks/ciphertext.h"
#include "pcol/ckks/params.h"

namespace pcol::ckks {

// Canonical-embedding encoder. Slot j is the evaluation at zeta^(5^j) for the
// primitive 2n-th root zeta = exp(i pi / n); inputs shorter than n/2 are
// zero-padded.
class Encoder {
 public:
  explicit Encoder(ContextPtr ctx);

  // Throws InvalidInput for more than n/2 values and Overflow if the scaled
  // coefficients do not fit below Q_level / 2.
  Plaintext Encode(std::span<const double> values, int level, double scale) const;
  Plaintext Encode(std::span<const std::complex<double>> values, int level,
                   double scale) const;
  // The same value in every slot; the polynomial is the constant round(v s).
  Plaintext EncodeConstant(double value, int level, double scale) const;

  std::vector<double> Decode(const Plaintext& pt) const;
  std::vector<std::complex<double>> DecodeComplex(const Plaintext& pt) const;

  // Slot values of a centered coefficient vector divided by `scale`.
  std::vector<std::complex<double>> SlotsFromCoefficients(
      const std::vector<long double>& coeffs, double scale) const;

  const ContextPtr& context() const { return ctx_; }

 private:
  void FftSpecial(std::vector<std::complex<double>>& vals) const;
  void FftSpecialInv(std::vector<std::complex<double>>& vals) const;

  ContextPtr ctx_;
  std::vector<std::size_t> rot_group_;
  std::vector<std::complex<double>> ksi_pows_;
};

}  // namespace pcol::ckks

#endif  // PCOL_CKKS_ENCODER_H_
