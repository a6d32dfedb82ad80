#pragma once

#include <string>

#include "biphoton/detector.hpp"
#include "biphoton/estimator.hpp"
#include "biphoton/grid.hpp"
#include "biphoton/propagation.hpp"

// Binary artifact formats, little-endian throughout:
//   BPG1: magic "BPG1", u32 n, f64 pitch, f64 wavelength, f64 focal_eff, then
//         n*n row-major f64 pairs (complex grid) or f64 phases (mask). The two
//         payloads are told apart by file size.
//   BPG2: magic "BPG2", u32 n, then n^2 x n^2 row-major f64.
//   BPF1: magic "BPF1", u32 n, u32 m, u16 dtype (0 = u16), then m frames of
//         n*n row-major u16 counts.

namespace biphoton {

void save_complex_grid(const std::string& path, const ComplexGrid& grid);
ComplexGrid load_complex_grid(const std::string& path);

void save_phase_mask(const std::string& path, const PhaseMask& mask);
PhaseMask load_phase_mask(const std::string& path);

void save_g2(const std::string& path, const G2Tensor& g2);
G2Tensor load_g2(const std::string& path);

void save_frames(const std::string& path, const FrameBlock& block);
FrameBlock load_frames(const std::string& path);

/// Append one block of frames to an existing BPF1 file (patches the count).
void append_frames(const std::string& path, const FrameBlock& block);

/// CSV with header "di,dj,value", offsets relative to the projection origin.
/// Negative bins are clipped to zero when clip_negative is set (display form).
void save_projection_csv(const std::string& path, const Projection& proj,
                         bool clip_negative = false);

/// Fixed shortest-roundtrip formatting so identical data gives identical bytes.
std::string format_double(double v);

}  // namespace biphoton
