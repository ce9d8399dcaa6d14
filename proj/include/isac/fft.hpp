// fft.hpp - thin FFTW wrapper
//
// Plans are cached per (size, direction) and created under a lock.
// Execution goes through fftw_execute_dft, which is safe to call from
// several threads on the same plan with distinct buffers.
//
// Both directions are unnormalized.

#pragma once

#include "isac/types.hpp"
#include <span>

namespace isac::fft {

void forward(std::span<Complex> data);
void inverse(std::span<Complex> data);

// Unitary variants (1/sqrt(N) on each direction).
void forward_unitary(std::span<Complex> data);
void inverse_unitary(std::span<Complex> data);

std::size_t next_pow2(std::size_t n);
bool is_pow2(std::size_t n);

} // namespace isac::fft
