#include "thetabal/kernels/theta_kernel.hpp"

#include <cstdlib>
#include <string>

namespace thetabal::kernels {

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  if (isa == Isa::scalar) return true;
#if defined(THETABAL_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect_isa() { return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar; }

Isa active_isa() {
  static const Isa chosen = [] {
    const char* env = std::getenv("THETABAL_ISA");
    if (env != nullptr && std::string(env) == "scalar") return Isa::scalar;
    return detect_isa();
  }();
  return chosen;
}

void accumulate(Isa isa, const TermView& terms, const PhaseView& phases, const AccumulatorView& out) {
  if (isa == Isa::avx2 && isa_available(Isa::avx2)) {
    accumulate_avx2(terms, phases, out);
    return;
  }
  accumulate_scalar(terms, phases, out);
}

}  // namespace thetabal::kernels
