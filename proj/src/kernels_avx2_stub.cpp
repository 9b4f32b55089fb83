// Stand-in for kernels_avx2.cpp on targets without x86-64 vector support:
// dispatch sees no vector set and stays on the scalar reference kernels.

#include "sapsk/kernels.hpp"

namespace sapsk::kernels {

const KernelSet* avx2_or_null() { return nullptr; }

}  // namespace sapsk::kernels
