#include "thetabal/kernels/theta_kernel.hpp"

#include <algorithm>

namespace thetabal::kernels {

void accumulate_scalar(const TermView& terms, const PhaseView& phases, const AccumulatorView& out) {
  const std::size_t np = phases.points;
  const int dim = terms.dim;
  constexpr std::size_t kBlock = 64;
  for (std::size_t p0 = 0; p0 < np; p0 += kBlock) {
    const std::size_t p1 = std::min(np, p0 + kBlock);
    for (std::size_t t = 0; t < terms.count; ++t) {
      const std::size_t row = static_cast<std::size_t>(terms.residue[t]);
      const std::int32_t* e = terms.exponent + t * static_cast<std::size_t>(dim);
      const double cre = terms.coef_re[t];
      const double cim = terms.coef_im[t];
      for (std::size_t p = p0; p < p1; ++p) {
        double pr = cre;
        double pi = cim;
        for (int i = 0; i < dim; ++i) {
          const std::size_t idx = (phases.axis_offset[i] + static_cast<std::size_t>(e[i])) * np + p;
          const double fr = phases.re[idx];
          const double fi = phases.im[idx];
          const double nr = pr * fr - pi * fi;
          const double ni = pr * fi + pi * fr;
          pr = nr;
          pi = ni;
        }
        out.value_re[row * np + p] += pr;
        out.value_im[row * np + p] += pi;
        if (out.grad_re != nullptr) {
          for (int i = 0; i < dim; ++i) {
            const double s = terms.grad_scale[t * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i)];
            const std::size_t g = (row * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i)) * np + p;
            out.grad_re[g] += -(s * pi);
            out.grad_im[g] += s * pr;
          }
        }
      }
    }
  }
}

}  // namespace thetabal::kernels
