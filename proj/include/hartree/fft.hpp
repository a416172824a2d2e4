#pragma once

#include "hartree/field.hpp"

namespace hartree {

// Plans are cached per grid size and shared across threads. Planning uses
// FFTW_ESTIMATE so results do not depend on timing measurements.
// Buffers must come from AlignedAllocator.

// In-place forward transform, unscaled.
void fft_forward(const Grid& g, cplx* data);
// In-place inverse transform, scaled by 1/n^3.
void fft_inverse(const Grid& g, cplx* data);

// Real-to-half-complex transforms; the half spectrum has n*n*(n/2+1) entries
// with the x axis halved.
std::size_t half_spectrum_size(const Grid& g);
void rfft_forward(const Grid& g, const double* in, cplx* out);
// Destroys `in`. Output scaled by 1/n^3.
void rfft_inverse(const Grid& g, cplx* in, double* out);

// One-dimensional in-place transforms of length g.n() on a contiguous
// aligned buffer; inverse scaled by 1/n.
void fft1_forward(const Grid& g, cplx* data);
void fft1_inverse(const Grid& g, cplx* data);

} // namespace hartree
