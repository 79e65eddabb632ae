#pragma once

#include <vector>

#include "bloch2d/model.hpp"

namespace bloch2d {

/// In-place 2D DFT on an L x L grid in window storage order.
///
/// forward: X_{p1,p2} = sum x_{m,n} exp(-i (k_{p1} m' + k_{p2} n')), k_p = 2 pi p / L,
/// with m' = m - lo the storage offset. inverse applies the conjugate kernel
/// and the 1/L^2 normalization, so inverse(forward(x)) == x. Under this
/// convention K_{u,v} multiplies mode (p1, p2) by exp(+i (u k_{p1} + v k_{p2})).
/// Plans are shared between instances of the same size; execution is
/// reentrant.
class Dft2d {
 public:
  explicit Dft2d(int L);

  int size() const { return L_; }
  void forward(std::vector<cplx>& data) const;
  void inverse(std::vector<cplx>& data) const;

 private:
  int L_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace bloch2d
