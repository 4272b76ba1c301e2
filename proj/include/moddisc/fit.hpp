#pragma once

// Per-example sound matching: mod-signal parameters (and, in discovery
// mode, the wavetable and Q) are optimized directly with Adam against the
// MSS loss of the synth render.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "moddisc/curves.hpp"
#include "moddisc/losses.hpp"
#include "moddisc/modsig.hpp"
#include "moddisc/synth.hpp"

namespace moddisc {

enum class Parameterization { Frame, Lpf, Spline };
std::string to_string(Parameterization p);
/// Accepts "frame", "lpf", "spline" (ConfigError otherwise).
Parameterization parse_parameterization(const std::string& name);

enum class FitMode { Extraction, Discovery };
std::string to_string(FitMode m);
FitMode parse_fit_mode(const std::string& name);

struct FitConfig {
  Parameterization parameterization = Parameterization::Frame;
  /// Extraction: the patch is frozen. Discovery: the wavetable is replaced by
  /// a learnable Gaussian-initialized table and Q is learned.
  FitMode mode = FitMode::Extraction;
  long steps = 400;
  double lr_mods = 0.05;
  double lr_synth = 0.05;
  /// Both rates follow a cosine decay from their initial value to this
  /// fraction of it at the last step. 1 disables the decay.
  double lr_final_fraction = 0.01;
  /// Position noise, applied in discovery mode only.
  double noise_sigma = 0.33;
  LpfSpec lpf;
  int spline_segments = 24;
  int spline_degree = 3;
  MssSpec loss;
  std::uint64_t seed = 0;
  std::size_t wavetable_positions = 16;
  double wavetable_init_sigma = 0.01;

  bool position_noise() const noexcept { return mode == FitMode::Discovery && noise_sigma > 0.0; }
  void validate() const;
};

/// Raw (unconstrained) parameters of the three mod signals. Frame and LPF
/// hold one value per control frame; Spline holds K * n + 1 control y raws.
struct ModParams {
  std::vector<double> add;
  std::vector<double> sub;
  std::vector<double> env;
};

struct FitResult {
  Parameterization parameterization = Parameterization::Frame;
  FitMode mode = FitMode::Extraction;
  ModParams params;                     // best parameters
  std::vector<PiecewiseBezier> curves;  // Spline only: add, sub, env with squashed y
  ModSet mods;                          // clean render of params
  std::vector<double> loss_history;     // one entry per step
  double initial_loss = 0.0;            // clean loss at initialization
  double final_loss = 0.0;              // last history entry (initial_loss when steps == 0)
  double best_loss = 0.0;               // clean loss of params
  long best_step = 0;
  std::optional<Wavetable> wavetable;   // discovery mode
  double q = 0.0;
  bool diverged = false;
  std::string message;
  double seconds = 0.0;
};

/// Learning-rate multiplier at `step`: cosine from 1 to final_fraction.
double lr_multiplier(long step, long total, double final_fraction);

/// Initial raw parameters (all zero) for a given frame count.
ModParams initial_params(const FitConfig& cfg, std::size_t frames);

/// Clean (beta = 1, noise-free) mod signals for raw parameters.
ModSet render_params(const ModParams& params, const FitConfig& cfg, std::size_t frames,
                     double rate_hz);

/// target.size() must be a multiple of patch.hop.
FitResult fit(std::span<const double> target, const SynthPatch& patch, const FitConfig& cfg);

}  // namespace moddisc
