#pragma once

#include <span>

#include "toa/grid.hpp"

namespace toa::fft {

// Unnormalized in-place DFTs. forward: sum_j a_j e^{-2 pi i jk/n};
// backward uses e^{+2 pi i jk/n}. Safe to call concurrently.
void forward(std::span<cplx> data);
void backward(std::span<cplx> data);

}  // namespace toa::fft
