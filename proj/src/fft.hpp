#pragma once

#include <complex>
#include <vector>

namespace vortexgas::fft {

/// In-place 2D DFT of an n x n row-major complex grid.
/// sign = +1 is the unnormalised synthesis sum_q in[q] exp(+2 pi i q.j / n),
/// sign = -1 the analysis transform.  Serialised internally; plans are cached
/// per (n, sign) with deterministic (estimate-mode) planning.
void transform_2d(std::vector<std::complex<double>>& data, int n, int sign);

}  // namespace vortexgas::fft
