#pragma once

// Inner loop of the theta lattice sums.
//
// For a block of P points sharing one coefficient table, accumulates
//
//   value[r][p]   += c_t * prod_i phase_i[e_ti][p]
//   grad[r][i][p] += sqrt(-1) * s_ti * c_t * prod_i phase_i[e_ti][p]
//
// over every term t, where r is the term's residue row. Phases are unit
// complex numbers exp(2 pi sqrt(-1) j x_i) tabulated per point; all Gaussian
// magnitude lives in c_t. The scalar kernel is the reference; the AVX2 kernel
// performs the same IEEE operations in the same order and must agree bitwise.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace thetabal::kernels {

struct TermView {
  std::size_t count = 0;
  int dim = 0;
  const std::int32_t* residue = nullptr;   // [count]
  const std::int32_t* exponent = nullptr;  // [count * dim], row index into the axis table
  const double* coef_re = nullptr;         // [count]
  const double* coef_im = nullptr;         // [count]
  const double* grad_scale = nullptr;      // [count * dim], 2 pi v_i
};

struct PhaseView {
  std::size_t points = 0;  // multiple of 4
  int dim = 0;
  const std::size_t* axis_offset = nullptr;  // [dim], first row of each axis
  const double* re = nullptr;                // [(row) * points + p]
  const double* im = nullptr;
};

struct AccumulatorView {
  std::size_t points = 0;  // multiple of 4, equal to PhaseView::points
  double* value_re = nullptr;  // [residue * points + p]
  double* value_im = nullptr;
  double* grad_re = nullptr;   // [(residue * dim + i) * points + p], null to skip
  double* grad_im = nullptr;
};

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Best kernel the running CPU supports (and the build includes).
Isa detect_isa();

/// Kernel used by default: detect_isa() unless THETABAL_ISA=scalar is set.
Isa active_isa();

bool isa_available(Isa isa);

void accumulate_scalar(const TermView& terms, const PhaseView& phases, const AccumulatorView& out);
void accumulate_avx2(const TermView& terms, const PhaseView& phases, const AccumulatorView& out);

void accumulate(Isa isa, const TermView& terms, const PhaseView& phases, const AccumulatorView& out);

}  // namespace thetabal::kernels
