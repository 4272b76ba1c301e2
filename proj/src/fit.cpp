#include "moddisc/fit.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>

#include "moddisc/error.hpp"
#include "moddisc/graph.hpp"
#include "moddisc/optim.hpp"
#include "moddisc/tape.hpp"

namespace moddisc {

std::string to_string(Parameterization p) {
  switch (p) {
    case Parameterization::Frame: return "frame";
    case Parameterization::Lpf: return "lpf";
    case Parameterization::Spline: return "spline";
  }
  return "?";
}

Parameterization parse_parameterization(const std::string& name) {
  if (name == "frame") return Parameterization::Frame;
  if (name == "lpf") return Parameterization::Lpf;
  if (name == "spline") return Parameterization::Spline;
  throw ConfigError("unknown parameterization '" + name + "' (expected frame, lpf or spline)");
}

std::string to_string(FitMode m) { return m == FitMode::Extraction ? "extraction" : "discovery"; }

FitMode parse_fit_mode(const std::string& name) {
  if (name == "extraction") return FitMode::Extraction;
  if (name == "discovery") return FitMode::Discovery;
  throw ConfigError("unknown mode '" + name + "' (expected extraction or discovery)");
}

void FitConfig::validate() const {
  if (steps < 0) throw ConfigError("steps must be non-negative");
  if (!(lr_mods > 0.0) || !(lr_synth > 0.0)) throw ConfigError("learning rates must be positive");
  if (!(lr_final_fraction > 0.0 && lr_final_fraction <= 1.0))
    throw ConfigError("lr_final_fraction must lie in (0, 1]");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be non-negative");
  if (spline_segments < 1 || spline_degree < 1) throw ConfigError("spline needs K >= 1 and degree >= 1");
  if (wavetable_positions < 1) throw ConfigError("wavetable needs at least one position");
  if (!(wavetable_init_sigma > 0.0)) throw ConfigError("wavetable init sigma must be positive");
  lpf.validate(kDefaultControlRate);
  loss.validate();
}

namespace {

std::size_t param_count(const FitConfig& cfg, std::size_t frames) {
  if (cfg.parameterization == Parameterization::Spline)
    return static_cast<std::size_t>(cfg.spline_segments * cfg.spline_degree + 1);
  return frames;
}

// Everything that stays fixed across steps.
struct Pipeline {
  const FitConfig& cfg;
  const SynthPatch& patch;
  std::size_t frames;
  MssLoss loss;
  std::vector<double> taps;
  std::unique_ptr<SplineRenderer> spline;
  std::vector<double> frozen_table;  // anti-aliased, extraction mode
  std::size_t max_harmonic = 0;

  Pipeline(std::span<const double> target, const SynthPatch& p, const FitConfig& c, std::size_t n_frames)
      : cfg(c), patch(p), frames(n_frames), loss(target, c.loss) {
    if (cfg.parameterization == Parameterization::Lpf)
      taps = design_windowed_sinc(cfg.lpf.cutoff_hz, patch.control_rate(), cfg.lpf.taps);
    if (cfg.parameterization == Parameterization::Spline) {
      const std::vector<double> zeros(param_count(cfg, frames), 0.0);
      spline = std::make_unique<SplineRenderer>(
          PiecewiseBezier::uniform(cfg.spline_segments, cfg.spline_degree, zeros), frames);
    }
    max_harmonic = antialias_harmonic_limit(patch.f0, patch.sample_rate, kWavetableFrameLength);
    if (cfg.mode == FitMode::Extraction) {
      const Wavetable aa = antialias_wavetable(patch.wavetable, patch.f0, patch.sample_rate);
      frozen_table.assign(aa.data().begin(), aa.data().end());
    }
  }

  Var render_mod(Tape& t, Var raw, double beta) const {
    switch (cfg.parameterization) {
      case Parameterization::Frame: return ops::logistic(t, raw);
      case Parameterization::Lpf: return ops::clamp01(t, ops::fir(t, ops::logistic(t, raw), taps));
      case Parameterization::Spline: return ops::spline_render(t, ops::logistic(t, raw), *spline, beta);
    }
    throw ConfigError("bad parameterization");
  }

  std::size_t positions() const {
    return cfg.mode == FitMode::Discovery ? cfg.wavetable_positions : patch.wavetable.positions();
  }
};

struct StepVars {
  Var add, sub, env, table, q_raw, loss;
};

struct State {
  ModParams params;
  std::vector<double> table;  // discovery: raw learnable table
  double q_raw = 0.0;
};

StepVars build(Tape& t, const Pipeline& pl, const State& s, double beta, const std::vector<double>* noise) {
  StepVars v;
  v.add = t.leaf(s.params.add);
  v.sub = t.leaf(s.params.sub);
  v.env = t.leaf(s.params.env);
  const bool discovery = pl.cfg.mode == FitMode::Discovery;
  Var table;
  Var q;
  if (discovery) {
    v.table = t.leaf(s.table);
    table = ops::antialias(t, v.table, kWavetableFrameLength, pl.max_harmonic);
    v.q_raw = t.leaf({s.q_raw});
    q = ops::q_from_raw(t, v.q_raw, pl.patch.filter);
  } else {
    table = t.constant(pl.frozen_table);
    q = t.constant({pl.patch.q});
  }
  Var add = pl.render_mod(t, v.add, beta);
  if (noise) add = ops::add_noise_clamped(t, add, *noise);
  const Var osc = ops::wavetable_osc(t, table, ops::upsample(t, add, pl.patch.hop), pl.positions(),
                                     pl.patch.f0, pl.patch.phase, pl.patch.sample_rate);
  const Var coeffs = ops::cutoff_coeffs(t, pl.render_mod(t, v.sub, beta), q, pl.patch.filter,
                                        pl.patch.sample_rate);
  const Var filtered = ops::tv_biquad(t, osc, coeffs, pl.patch.hop);
  const Var env = ops::upsample(t, pl.render_mod(t, v.env, beta), pl.patch.hop);
  v.loss = ops::mss(t, ops::multiply(t, filtered, env), pl.loss);
  return v;
}

double clean_loss(const Pipeline& pl, const State& s) {
  Tape t;
  const StepVars v = build(t, pl, s, 1.0, nullptr);
  return t.value(v.loss)[0];
}

}  // namespace

double lr_multiplier(long step, long total, double final_fraction) {
  if (total <= 1) return 1.0;
  const double progress = static_cast<double>(step) / static_cast<double>(total - 1);
  return final_fraction + (1.0 - final_fraction) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

ModParams initial_params(const FitConfig& cfg, std::size_t frames) {
  const std::size_t n = param_count(cfg, frames);
  return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
}

ModSet render_params(const ModParams& params, const FitConfig& cfg, std::size_t frames,
                     double rate_hz) {
  auto one = [&](const std::vector<double>& raw) -> ModSignal {
    switch (cfg.parameterization) {
      case Parameterization::Frame: return render_frame(raw, rate_hz);
      case Parameterization::Lpf: return render_lpf(raw, cfg.lpf, rate_hz);
      case Parameterization::Spline: {
        std::vector<double> y(raw.size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = logistic(raw[i]);
        return render_spline(PiecewiseBezier::uniform(cfg.spline_segments, cfg.spline_degree, y),
                             frames, 1.0, rate_hz);
      }
    }
    throw ConfigError("bad parameterization");
  };
  return {one(params.add), one(params.sub), one(params.env)};
}

FitResult fit(std::span<const double> target, const SynthPatch& patch, const FitConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  patch.validate();
  if (target.empty() || target.size() % patch.hop != 0)
    detail::throw_shape("fit: target length must be a positive multiple of the hop");
  for (double v : target)
    if (!std::isfinite(v)) throw ValidationError("fit: target audio contains non-finite samples");
  const std::size_t frames = frames_for_samples(target.size(), patch.hop);

  Pipeline pl(target, patch, cfg, frames);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  State state;
  state.params = initial_params(cfg, frames);
  const bool discovery = cfg.mode == FitMode::Discovery;
  if (discovery) {
    state.table.resize(cfg.wavetable_positions * kWavetableFrameLength);
    for (double& v : state.table) v = cfg.wavetable_init_sigma * normal(rng);
  }

  FitResult res;
  res.parameterization = cfg.parameterization;
  res.mode = cfg.mode;
  res.initial_loss = clean_loss(pl, state);

  State best = state;
  double best_loss = std::numeric_limits<double>::infinity();
  long best_step = -1;
  AdamState adam_add, adam_sub, adam_env, adam_table, adam_q;
  AdamOptions mods_opt{cfg.lr_mods};
  AdamOptions synth_opt{cfg.lr_synth};
  std::vector<double> noise(frames);

  res.loss_history.reserve(static_cast<std::size_t>(cfg.steps));
  for (long step = 0; step < cfg.steps; ++step) {
    const double beta =
        cfg.parameterization == Parameterization::Spline ? blend_schedule(step, cfg.steps) : 1.0;
    const double sigma = cfg.position_noise() ? noise_schedule(step, cfg.steps, cfg.noise_sigma) : 0.0;
    if (sigma > 0.0)
      for (double& v : noise) v = sigma * normal(rng);

    Tape tape;
    StepVars v;
    double loss = 0.0;
    try {
      v = build(tape, pl, state, beta, sigma > 0.0 ? &noise : nullptr);
      loss = tape.value(v.loss)[0];
    } catch (const NumericalError& e) {
      res.diverged = true;
      res.message = e.what();
      break;
    }
    res.loss_history.push_back(loss);
    if (beta == 1.0 && sigma == 0.0 && loss < best_loss) {
      best_loss = loss;
      best = state;
      best_step = step;
    }
    tape.backward(v.loss);
    const double mult = lr_multiplier(step, cfg.steps, cfg.lr_final_fraction);
    mods_opt.lr = cfg.lr_mods * mult;
    synth_opt.lr = cfg.lr_synth * mult;
    try {
      adam_step(state.params.add, tape.grad(v.add), adam_add, mods_opt);
      adam_step(state.params.sub, tape.grad(v.sub), adam_sub, mods_opt);
      adam_step(state.params.env, tape.grad(v.env), adam_env, mods_opt);
      if (discovery) {
        adam_step(state.table, tape.grad(v.table), adam_table, synth_opt);
        std::vector<double> q{state.q_raw};
        adam_step(q, tape.grad(v.q_raw), adam_q, synth_opt);
        state.q_raw = q[0];
      }
    } catch (const NumericalError& e) {
      res.diverged = true;
      res.message = e.what();
      break;
    }
  }

  if (!res.diverged) {
    try {
      const double last = clean_loss(pl, state);
      if (last < best_loss) {
        best_loss = last;
        best = state;
        best_step = static_cast<long>(res.loss_history.size());
      }
    } catch (const NumericalError& e) {
      res.diverged = true;
      res.message = e.what();
    }
  }
  if (best_step < 0) {
    best_loss = res.initial_loss;
    best_step = 0;
    best = State{initial_params(cfg, frames), {}, 0.0};
    if (discovery) best.table = state.table;
  }

  res.params = best.params;
  res.best_loss = best_loss;
  res.best_step = best_step;
  res.final_loss = res.loss_history.empty() ? res.initial_loss : res.loss_history.back();
  res.mods = render_params(best.params, cfg, frames, patch.control_rate());
  if (cfg.parameterization == Parameterization::Spline) {
    for (const auto* raw : {&best.params.add, &best.params.sub, &best.params.env}) {
      std::vector<double> y(raw->size());
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = logistic((*raw)[i]);
      res.curves.push_back(PiecewiseBezier::uniform(cfg.spline_segments, cfg.spline_degree, y));
    }
  }
  if (discovery) {
    res.wavetable = Wavetable(cfg.wavetable_positions, best.table, true);
    res.q = q_from_raw(best.q_raw, patch.filter);
  } else {
    res.q = patch.q;
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace moddisc
