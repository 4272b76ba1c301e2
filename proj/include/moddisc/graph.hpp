#pragma once

// Tape wrappers for the differentiable pipeline. Each function records one
// registered primitive whose adjoint is the matching hand-written VJP.

#include <cstddef>
#include <span>

#include "moddisc/losses.hpp"
#include "moddisc/modsig.hpp"
#include "moddisc/synth.hpp"
#include "moddisc/tape.hpp"

namespace moddisc::ops {

Var logistic(Tape& t, Var raw);
/// Zero-phase FIR with reflect padding.
Var fir(Tape& t, Var x, std::span<const double> taps);
Var clamp01(Tape& t, Var x);
/// Frame-rate spline render of control y values (already in [0, 1]).
Var spline_render(Tape& t, Var y, const SplineRenderer& renderer, double beta);
/// x + noise, clamped to [0, 1]; noise is a constant.
Var add_noise_clamped(Tape& t, Var x, Vec noise);
Var upsample(Tape& t, Var frames, std::size_t hop);
/// Harmonic truncation of every frame of a positions x frame_length table.
Var antialias(Tape& t, Var table, std::size_t frame_length, std::size_t max_harmonic);
Var wavetable_osc(Tape& t, Var table, Var mod_audio, std::size_t positions, double f0,
                  double phase0, double sample_rate);
Var q_from_raw(Tape& t, Var raw, const FilterRange& range);
/// sub frames (in [0, 1]) and a one-element Q -> 5 coefficients per frame,
/// laid out b0, b1, b2, a1, a2.
Var cutoff_coeffs(Tape& t, Var sub, Var q, const FilterRange& range, double sample_rate);
Var tv_biquad(Tape& t, Var x, Var coeffs, std::size_t hop);
Var multiply(Tape& t, Var a, Var b);
Var mss(Tape& t, Var x, const MssLoss& loss);

}  // namespace moddisc::ops
