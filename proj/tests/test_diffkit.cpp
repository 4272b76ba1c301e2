#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <random>

#include "moddisc/error.hpp"
#include "moddisc/fit.hpp"
#include "moddisc/graph.hpp"
#include "moddisc/optim.hpp"
#include "moddisc/tape.hpp"
#include "oracles.hpp"

using namespace moddisc;
using Catch::Approx;

namespace {

std::vector<double> normal_vec(std::size_t n, std::mt19937_64& rng, double mean = 0.0, double sd = 1.0) {
  std::normal_distribution<double> d(mean, sd);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

std::vector<double> uniform_vec(std::size_t n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

using Build = std::function<Var(Tape&, Var)>;

// Relative FD error of one primitive, seeded with a random upstream vector.
double op_error(const Build& build, const std::vector<double>& p0, unsigned seed) {
  Tape probe;
  const std::size_t out_len = probe.value(build(probe, probe.leaf(p0))).size();
  std::mt19937_64 rng(seed);
  const auto up = normal_vec(out_len, rng);
  auto f = [&](const std::vector<double>& p) {
    Tape t;
    const auto& y = t.value(build(t, t.leaf(p)));
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += up[i] * y[i];
    return s;
  };
  Tape t;
  const Var x = t.leaf(p0);
  t.backward(build(t, x), up);
  const auto g = t.grad(x);
  return oracle::fd_rel_error(f, p0, g, oracle::kDefaultSteps, 1e-7);
}

SynthPatch short_patch(std::mt19937_64& rng) {
  SynthPatch p;
  p.wavetable = default_wavetable(16);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  p.f0 = 110.0 * std::pow(2.0, 2.0 * u(rng));
  p.phase = u(rng);
  p.q = 0.8 + 2.0 * u(rng);
  return p;
}

// Random curves kept off the [0, 1] bounds, where the table read and the
// cutoff mapping are only one-sided differentiable.
ModSet random_mods(std::mt19937_64& rng, std::size_t frames) {
  auto one = [&] {
    ModSignal s = render_spline(random_mod_curve(rng), frames);
    for (double& v : s.values) v = 0.05 + 0.9 * v;
    return s;
  };
  ModSignal a = one(), b = one(), c = one();
  return {std::move(a), std::move(b), std::move(c)};
}

}  // namespace

TEST_CASE("tape basics", "[diffkit]") {
  Tape t;
  const Var x = t.leaf({3.0});
  t.backward(x);
  CHECK(t.grad(x) == Vec{1.0});

  const Var a = t.leaf({1.0, -2.0, 0.5});
  const Var y = ops::logistic(t, a);
  t.backward(y, {0.0, 0.0, 0.0});
  for (double g : t.grad(a)) CHECK(g == 0.0);

  const Var c = t.constant({1.0, 2.0, 3.0});
  const Var m = ops::multiply(t, a, c);
  t.backward(m);
  CHECK(t.grad(a) == Vec{1.0, 2.0, 3.0});
  CHECK(t.grad(c) == Vec{0.0, 0.0, 0.0});

  CHECK_THROWS_AS(t.apply("not_a_primitive", {a}, {0.0}, [](const Vec&) { return std::vector<Vec>{}; }), ContractError);
  CHECK(is_registered_primitive("tv_biquad"));
  CHECK_FALSE(is_registered_primitive("not_a_primitive"));
  CHECK(registered_primitives().size() >= 13);
}

TEST_CASE("every primitive matches finite differences in isolation", "[diffkit]") {
  std::mt19937_64 rng(21);
  const double tol = 1e-5;
  const FilterRange range;
  const double fs = 48000.0;
  const std::size_t hop = 16, frames = 9, n = (frames - 1) * hop;

  CHECK(op_error([](Tape& t, Var x) { return ops::logistic(t, x); }, normal_vec(20, rng), 1) < tol);
  const auto taps = design_windowed_sinc(40.0, 500.0);
  CHECK(op_error([&](Tape& t, Var x) { return ops::fir(t, x, taps); }, normal_vec(60, rng), 2) < tol);
  CHECK(op_error([](Tape& t, Var x) { return ops::clamp01(t, x); }, uniform_vec(30, rng, -0.4, 1.4), 3) < tol);
  {
    const auto layout = PiecewiseBezier::uniform(4, 3, std::vector<double>(13, 0.5));
    const SplineRenderer r(layout, 40);
    CHECK(op_error([&](Tape& t, Var x) { return ops::spline_render(t, x, r, 0.6); }, uniform_vec(13, rng, 0, 1), 4) < tol);
  }
  {
    const auto nz = normal_vec(25, rng, 0.0, 0.2);
    CHECK(op_error([&](Tape& t, Var x) { return ops::add_noise_clamped(t, x, nz); }, uniform_vec(25, rng, 0.1, 0.9), 5) <
          tol);
  }
  CHECK(op_error([&](Tape& t, Var x) { return ops::upsample(t, x, hop); }, normal_vec(frames, rng), 6) < tol);
  CHECK(op_error([](Tape& t, Var x) { return ops::antialias(t, x, 1024, 100); }, normal_vec(2048, rng), 7) < tol);
  {
    const auto table = normal_vec(3 * 1024, rng, 0.0, 0.3);
    const auto mod = uniform_vec(n, rng, 0.05, 0.95);
    CHECK(op_error(
              [&](Tape& t, Var x) {
                return ops::wavetable_osc(t, t.constant(table), x, 3, 330.0, 0.2, fs);
              },
              mod, 8) < tol);
    CHECK(op_error([&](Tape& t, Var x) { return ops::wavetable_osc(t, x, t.constant(mod), 3, 330.0, 0.2, fs); },
                   table, 9) < tol);
  }
  CHECK(op_error([&](Tape& t, Var x) { return ops::q_from_raw(t, x, range); }, {0.3}, 10) < tol);
  {
    const auto sub = uniform_vec(frames, rng, 0.05, 0.95);
    CHECK(op_error([&](Tape& t, Var x) { return ops::cutoff_coeffs(t, x, t.constant({1.3}), range, fs); }, sub,  11) < tol);
    CHECK(op_error([&](Tape& t, Var x) { return ops::cutoff_coeffs(t, t.constant(sub), x, range, fs); }, {1.3}, 12) <
          tol);
  }
  {
    std::vector<double> coeffs;
    for (std::size_t j = 0; j < frames; ++j) {
      const auto c = biquad_lp_coeffs(500.0 + 400.0 * static_cast<double>(j), 1.5, fs);
      coeffs.insert(coeffs.end(), {c.b0, c.b1, c.b2, c.a1, c.a2});
    }
    const auto x = normal_vec(n, rng);
    CHECK(op_error([&](Tape& t, Var v) { return ops::tv_biquad(t, v, t.constant(coeffs), hop); }, x, 13) < tol);
    CHECK(op_error([&](Tape& t, Var v) { return ops::tv_biquad(t, t.constant(x), v, hop); }, coeffs, 14) < tol);
  }
  {
    const auto b = normal_vec(10, rng);
    CHECK(op_error([&](Tape& t, Var x) { return ops::multiply(t, x, t.constant(b)); }, normal_vec(10, rng), 15) < tol);
  }
  {
    MssSpec spec;
    spec.resolutions = {{256, 64, 200}};
    const MssLoss loss(normal_vec(600, rng, 0.0, 0.3), spec);
    CHECK(op_error([&](Tape& t, Var x) { return ops::mss(t, x, loss); }, normal_vec(600, rng, 0.0, 0.3), 16) < tol);
  }
}

TEST_CASE("full render + MSS chain gradient on a 0.25 s clip", "[diffkit]") {
  std::mt19937_64 rng(31);
  const SynthPatch patch = short_patch(rng);
  const std::size_t n = 12000, frames = frames_for_samples(n, patch.hop);
  const ModSet truth = random_mods(rng, frames);
  const MssLoss loss(mod_synth_render(patch, truth));
  const ModSet guess = random_mods(rng, frames);
  const auto table = normal_vec(16 * 1024, rng, 0.0, 0.3);
  const std::size_t limit = antialias_harmonic_limit(patch.f0, patch.sample_rate, 1024);

  auto build = [&](Tape& t, Var add, Var sub, Var env, Var tab) {
    const Var aa = ops::antialias(t, tab, 1024, limit);
    const Var osc = ops::wavetable_osc(t, aa, ops::upsample(t, add, patch.hop), 16, patch.f0, patch.phase,
                                       patch.sample_rate);
    const Var coeffs = ops::cutoff_coeffs(t, sub, t.constant({patch.q}), patch.filter, patch.sample_rate);
    const Var filt = ops::tv_biquad(t, osc, coeffs, patch.hop);
    return ops::mss(t, ops::multiply(t, filt, ops::upsample(t, env, patch.hop)), loss);
  };
  Tape t;
  const Var add = t.leaf(guess.add.values), sub = t.leaf(guess.sub.values), env = t.leaf(guess.env.values),
            tab = t.leaf(table);
  t.backward(build(t, add, sub, env, tab));
  auto eval = [&](int which, const std::vector<double>& p) {
    Tape u;
    const Var a = u.leaf(which == 0 ? p : guess.add.values), s = u.leaf(which == 1 ? p : guess.sub.values),
              e = u.leaf(which == 2 ? p : guess.env.values), w = u.leaf(which == 3 ? p : table);
    return u.value(build(u, a, s, e, w))[0];
  };
  const std::vector<double>* base[] = {&guess.add.values, &guess.sub.values, &guess.env.values, &table};
  const Var leaves[] = {add, sub, env, tab};
  for (int which = 0; which < 4; ++which) {
    const auto g = t.grad(leaves[which]);
    const double err = oracle::fd_probe_error([&](const std::vector<double>& p) { return eval(which, p); },
                                              *base[which], g, oracle::kDefaultSteps, 6, 40 + which);
    INFO("leaf " << which);
    CHECK(err < 1e-3);
  }
}

TEST_CASE("Adam step", "[diffkit]") {
  std::vector<double> p = {1.0, -2.0};
  AdamState s;
  adam_step(p, std::vector<double>{0.0, 0.0}, s);
  CHECK(p == std::vector<double>{1.0, -2.0});

  std::vector<double> q = {0.0, 0.0};
  AdamState st;
  const AdamOptions opt{0.01};
  std::vector<double> prev = q;
  for (int i = 0; i < 5000; ++i) {
    prev = q;
    adam_step(q, std::vector<double>{3.0, -0.002}, st, opt);
  }
  CHECK(q[0] - prev[0] == Approx(-0.01).epsilon(1e-6));
  CHECK(q[1] - prev[1] == Approx(0.01).epsilon(1e-3));

  // first step equals lr * sign(g) with bias correction
  std::vector<double> r = {0.5};
  AdamState rs;
  adam_step(r, std::vector<double>{0.7}, rs, AdamOptions{0.05});
  CHECK(r[0] == Approx(0.5 - 0.05).epsilon(1e-7));

  std::vector<double> a = {1, 2}, b = {1, 2};
  AdamState sa, sb;
  for (int i = 0; i < 10; ++i) {
    const std::vector<double> g = {std::sin(i * 1.0), std::cos(i * 1.0)};
    adam_step(a, g, sa);
    adam_step(b, g, sb);
  }
  CHECK(a == b);

  std::vector<double> keep = {1.0};
  AdamState ks;
  CHECK_THROWS_AS(adam_step(keep, std::vector<double>{std::nan("")}, ks), NumericalError);
  CHECK(keep[0] == 1.0);
  CHECK(ks.t == 0);
}

TEST_CASE("finite_diff_check", "[diffkit]") {
  const std::vector<double> p = {0.3, -1.2, 2.0};
  auto quad = [](std::span<const double> x) { return x[0] * x[0] + 3 * x[1] * x[1] + x[0] * x[2]; };
  const std::vector<double> g = {2 * p[0] + p[2], 6 * p[1], p[0]};
  CHECK(finite_diff_check(quad, p, g).max_rel_error < 1e-8);
  auto lin = [](std::span<const double> x) { return 2 * x[0] - x[1] + 0.5 * x[2]; };
  CHECK(finite_diff_check(lin, p, std::vector<double>{2, -1, 0.5}).max_rel_error < 1e-9);
  const auto bad = finite_diff_check(lin, p, std::vector<double>{2, -1, 0.7});
  CHECK(bad.worst == 2);
  CHECK(bad.max_rel_error > 0.1);
  CHECK(finite_diff_check(quad, p, g, 1e-6, 5, 3).max_rel_error < 1e-8);
}

TEST_CASE("fit bookkeeping and determinism", "[diffkit]") {
  std::mt19937_64 rng(41);
  const SynthPatch patch = short_patch(rng);
  const std::size_t n = 12000, frames = frames_for_samples(n, patch.hop);
  const auto target = mod_synth_render(patch, random_mods(rng, frames));

  FitConfig cfg;
  cfg.parameterization = Parameterization::Lpf;
  cfg.steps = 0;
  const auto zero = fit(target, patch, cfg);
  CHECK(zero.loss_history.empty());
  CHECK(zero.params.add == initial_params(cfg, frames).add);
  for (double v : zero.mods.env.values) CHECK(v == Approx(0.5).epsilon(1e-12));
  CHECK(zero.final_loss == zero.initial_loss);

  for (auto param : {Parameterization::Frame, Parameterization::Lpf, Parameterization::Spline}) {
    cfg.parameterization = param;
    cfg.steps = 12;
    const auto a = fit(target, patch, cfg);
    const auto b = fit(target, patch, cfg);
    CHECK(a.loss_history.size() == 12);
    CHECK(a.final_loss == a.loss_history.back());
    CHECK(a.loss_history == b.loss_history);
    CHECK(a.params.add == b.params.add);
    CHECK(a.best_loss <= a.initial_loss);
    CHECK_FALSE(a.diverged);
  }

  cfg.mode = FitMode::Discovery;
  cfg.parameterization = Parameterization::Lpf;
  cfg.seed = 5;
  const auto d1 = fit(target, patch, cfg);
  const auto d2 = fit(target, patch, cfg);
  REQUIRE(d1.wavetable.has_value());
  CHECK(d1.wavetable->positions() == 16);
  CHECK(d1.loss_history == d2.loss_history);
  CHECK(d1.q >= patch.filter.q_min);
  CHECK(d1.q <= patch.filter.q_max);
  for (double l : d1.loss_history) CHECK(std::isfinite(l));

  cfg.steps = -1;
  CHECK_THROWS_AS(fit(target, patch, cfg), ConfigError);
  CHECK_THROWS_AS(fit(std::vector<double>(target.begin(), target.end() - 1), patch, FitConfig{}), ShapeError);
}

TEST_CASE("self-reconstruction loss improves smoothly", "[diffkit]") {
  std::mt19937_64 rng(43);
  const SynthPatch patch = short_patch(rng);
  const std::size_t n = 24000, frames = frames_for_samples(n, patch.hop);
  const auto target = mod_synth_render(patch, random_mods(rng, frames));
  FitConfig cfg;
  cfg.parameterization = Parameterization::Lpf;
  cfg.steps = 300;
  const auto r = fit(target, patch, cfg);
  CHECK(r.best_loss < 0.1 * r.initial_loss);
  std::vector<double> smooth;
  for (std::size_t i = 0; i + 50 <= r.loss_history.size(); ++i) {
    double s = 0;
    for (std::size_t k = i; k < i + 50; ++k) s += r.loss_history[k];
    smooth.push_back(s / 50.0);
  }
  std::size_t ok = 0;
  for (std::size_t i = 1; i < smooth.size(); ++i) ok += smooth[i] <= smooth[i - 1];
  CHECK(static_cast<double>(ok) >= 0.95 * static_cast<double>(smooth.size() - 1));
}

TEST_CASE("learning-rate decay", "[diffkit]") {
  CHECK(lr_multiplier(0, 100, 0.01) == 1.0);
  CHECK(lr_multiplier(99, 100, 0.01) == Approx(0.01));
  CHECK(lr_multiplier(0, 1, 0.01) == 1.0);
  for (long s = 1; s < 100; ++s) CHECK(lr_multiplier(s, 100, 0.01) <= lr_multiplier(s - 1, 100, 0.01));
}
