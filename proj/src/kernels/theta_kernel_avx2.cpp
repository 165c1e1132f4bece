#include "thetabal/kernels/theta_kernel.hpp"

#include <algorithm>

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace thetabal::kernels {

#if defined(__AVX2__)

// mul/add/sub only (no FMA) so results match the scalar kernel bit for bit.
void accumulate_avx2(const TermView& terms, const PhaseView& phases, const AccumulatorView& out) {
  const std::size_t np = phases.points;
  const int dim = terms.dim;
  constexpr std::size_t kBlock = 64;
  const __m256d sign = _mm256_set1_pd(-0.0);
  for (std::size_t p0 = 0; p0 < np; p0 += kBlock) {
    const std::size_t p1 = std::min(np, p0 + kBlock);
    for (std::size_t t = 0; t < terms.count; ++t) {
      const std::size_t row = static_cast<std::size_t>(terms.residue[t]);
      const std::int32_t* e = terms.exponent + t * static_cast<std::size_t>(dim);
      const __m256d cre = _mm256_set1_pd(terms.coef_re[t]);
      const __m256d cim = _mm256_set1_pd(terms.coef_im[t]);
      for (std::size_t p = p0; p < p1; p += 4) {
        __m256d pr = cre;
        __m256d pi = cim;
        for (int i = 0; i < dim; ++i) {
          const std::size_t idx = (phases.axis_offset[i] + static_cast<std::size_t>(e[i])) * np + p;
          const __m256d fr = _mm256_loadu_pd(phases.re + idx);
          const __m256d fi = _mm256_loadu_pd(phases.im + idx);
          const __m256d nr = _mm256_sub_pd(_mm256_mul_pd(pr, fr), _mm256_mul_pd(pi, fi));
          const __m256d ni = _mm256_add_pd(_mm256_mul_pd(pr, fi), _mm256_mul_pd(pi, fr));
          pr = nr;
          pi = ni;
        }
        double* vr = out.value_re + row * np + p;
        double* vi = out.value_im + row * np + p;
        _mm256_storeu_pd(vr, _mm256_add_pd(_mm256_loadu_pd(vr), pr));
        _mm256_storeu_pd(vi, _mm256_add_pd(_mm256_loadu_pd(vi), pi));
        if (out.grad_re != nullptr) {
          for (int i = 0; i < dim; ++i) {
            const __m256d s =
                _mm256_set1_pd(terms.grad_scale[t * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i)]);
            const std::size_t g = (row * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i)) * np + p;
            double* gr = out.grad_re + g;
            double* gi = out.grad_im + g;
            const __m256d neg = _mm256_xor_pd(_mm256_mul_pd(s, pi), sign);
            _mm256_storeu_pd(gr, _mm256_add_pd(_mm256_loadu_pd(gr), neg));
            _mm256_storeu_pd(gi, _mm256_add_pd(_mm256_loadu_pd(gi), _mm256_mul_pd(s, pr)));
          }
        }
      }
    }
  }
}

#else

void accumulate_avx2(const TermView& terms, const PhaseView& phases, const AccumulatorView& out) {
  accumulate_scalar(terms, phases, out);
}

#endif

}  // namespace thetabal::kernels
