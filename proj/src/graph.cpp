#include "moddisc/graph.hpp"

#include <algorithm>
#include <memory>

#include "moddisc/error.hpp"

namespace moddisc {

void register_builtin_primitives() {
  for (const char* name : {"logistic", "fir", "clamp01", "spline_render", "add_noise_clamped",
                           "upsample", "antialias", "wavetable_osc", "q_from_raw",
                           "cutoff_coeffs", "tv_biquad", "multiply", "mss"})
    register_primitive(name);
}

namespace ops {

Var logistic(Tape& t, Var raw) {
  Vec out = t.value(raw);
  for (double& v : out) v = moddisc::logistic(v);
  Vec s = out;
  return t.apply("logistic", {raw}, std::move(out), [s = std::move(s)](const Vec& g) {
    Vec gi(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) gi[i] = g[i] * s[i] * (1.0 - s[i]);
    return std::vector<Vec>{std::move(gi)};
  });
}

Var fir(Tape& t, Var x, std::span<const double> taps) {
  Vec k(taps.begin(), taps.end());
  Vec out = zero_phase_filter(t.value(x), k);
  return t.apply("fir", {x}, std::move(out), [k = std::move(k)](const Vec& g) {
    return std::vector<Vec>{zero_phase_filter_vjp(g, k)};
  });
}

Var clamp01(Tape& t, Var x) {
  const Vec& in = t.value(x);
  Vec out(in.size());
  std::vector<char> pass(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = std::clamp(in[i], 0.0, 1.0);
    pass[i] = in[i] >= 0.0 && in[i] <= 1.0;
  }
  return t.apply("clamp01", {x}, std::move(out), [pass = std::move(pass)](const Vec& g) {
    Vec gi(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) gi[i] = pass[i] ? g[i] : 0.0;
    return std::vector<Vec>{std::move(gi)};
  });
}

Var spline_render(Tape& t, Var y, const SplineRenderer& renderer, double beta) {
  Vec out = renderer.render(t.value(y), beta);
  return t.apply("spline_render", {y}, std::move(out), [&renderer, beta](const Vec& g) {
    return std::vector<Vec>{renderer.vjp(g, beta)};
  });
}

Var add_noise_clamped(Tape& t, Var x, Vec noise) {
  const Vec& in = t.value(x);
  if (noise.size() != in.size()) detail::throw_shape("noise length mismatch");
  Vec out(in.size());
  std::vector<char> pass(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double v = in[i] + noise[i];
    out[i] = std::clamp(v, 0.0, 1.0);
    pass[i] = v >= 0.0 && v <= 1.0;
  }
  return t.apply("add_noise_clamped", {x}, std::move(out), [pass = std::move(pass)](const Vec& g) {
    Vec gi(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) gi[i] = pass[i] ? g[i] : 0.0;
    return std::vector<Vec>{std::move(gi)};
  });
}

Var upsample(Tape& t, Var frames, std::size_t hop) {
  const std::size_t n = t.value(frames).size();
  Vec out = upsample_linear(t.value(frames), hop);
  return t.apply("upsample", {frames}, std::move(out), [n, hop](const Vec& g) {
    return std::vector<Vec>{upsample_linear_vjp(g, n, hop)};
  });
}

Var antialias(Tape& t, Var table, std::size_t frame_length, std::size_t max_harmonic) {
  Vec out = antialias_data(t.value(table), frame_length, max_harmonic);
  return t.apply("antialias", {table}, std::move(out), [frame_length, max_harmonic](const Vec& g) {
    return std::vector<Vec>{antialias_data(g, frame_length, max_harmonic)};
  });
}

Var wavetable_osc(Tape& t, Var table, Var mod_audio, std::size_t positions, double f0,
                  double phase0, double sample_rate) {
  const Vec& data = t.value(table);
  if (positions == 0 || data.size() % positions != 0)
    detail::throw_shape("wavetable size is not a multiple of the position count");
  const std::size_t len = data.size() / positions;
  auto wt = std::make_shared<Wavetable>(positions, data, false, len);
  Vec mod = t.value(mod_audio);
  Vec out = moddisc::wavetable_osc(*wt, mod, f0, phase0, sample_rate);
  const bool want_table = t.requires_grad(table);
  return t.apply("wavetable_osc", {table, mod_audio}, std::move(out),
                 [wt, mod = std::move(mod), f0, phase0, sample_rate, want_table](const Vec& g) {
                   WavetableOscGrad r =
                       wavetable_osc_vjp(*wt, mod, f0, phase0, sample_rate, g, want_table);
                   return std::vector<Vec>{std::move(r.table), std::move(r.mod)};
                 });
}

Var q_from_raw(Tape& t, Var raw, const FilterRange& range) {
  const Vec& r = t.value(raw);
  if (r.size() != 1) detail::throw_shape("q_from_raw expects a scalar");
  const double x = r[0];
  return t.apply("q_from_raw", {raw}, Vec{moddisc::q_from_raw(x, range)},
                 [x, range](const Vec& g) {
                   return std::vector<Vec>{Vec{g[0] * q_from_raw_derivative(x, range)}};
                 });
}

Var cutoff_coeffs(Tape& t, Var sub, Var q, const FilterRange& range, double sample_rate) {
  const Vec& m = t.value(sub);
  if (t.value(q).size() != 1) detail::throw_shape("cutoff_coeffs expects a scalar Q");
  const double qv = t.value(q)[0];
  Vec fc = map_mod_to_cutoff(m, range);
  Vec out(5 * m.size());
  for (std::size_t j = 0; j < m.size(); ++j) {
    const BiquadCoeffs c = biquad_lp_coeffs(fc[j], qv, sample_rate);
    out[5 * j + 0] = c.b0;
    out[5 * j + 1] = c.b1;
    out[5 * j + 2] = c.b2;
    out[5 * j + 3] = c.a1;
    out[5 * j + 4] = c.a2;
  }
  const bool want_q = t.requires_grad(q);
  return t.apply("cutoff_coeffs", {sub, q}, std::move(out),
                 [fc = std::move(fc), qv, range, sample_rate, want_q](const Vec& g) {
                   Vec gm(fc.size());
                   double gq = 0.0;
                   for (std::size_t j = 0; j < fc.size(); ++j) {
                     const BiquadCoeffsJacobian jac = biquad_lp_jacobian(fc[j], qv, sample_rate);
                     const double* gj = g.data() + 5 * j;
                     auto dot = [gj](const BiquadCoeffs& d) {
                       return gj[0] * d.b0 + gj[1] * d.b1 + gj[2] * d.b2 + gj[3] * d.a1 + gj[4] * d.a2;
                     };
                     gm[j] = dot(jac.d_cutoff) * cutoff_derivative(fc[j], range);
                     if (want_q) gq += dot(jac.d_q);
                   }
                   return std::vector<Vec>{std::move(gm), want_q ? Vec{gq} : Vec{}};
                 });
}

namespace {

std::vector<BiquadCoeffs> unpack(const Vec& flat) {
  if (flat.size() % 5 != 0) detail::throw_shape("coefficient vector is not a multiple of 5");
  std::vector<BiquadCoeffs> c(flat.size() / 5);
  for (std::size_t j = 0; j < c.size(); ++j)
    c[j] = {flat[5 * j], flat[5 * j + 1], flat[5 * j + 2], flat[5 * j + 3], flat[5 * j + 4]};
  return c;
}

}  // namespace

Var tv_biquad(Tape& t, Var x, Var coeffs, std::size_t hop) {
  auto frames = std::make_shared<std::vector<BiquadCoeffs>>(unpack(t.value(coeffs)));
  Vec in = t.value(x);
  Vec out = moddisc::tv_biquad(in, *frames, hop);
  auto y = std::make_shared<Vec>(out);
  return t.apply("tv_biquad", {x, coeffs}, std::move(out),
                 [frames, in = std::move(in), y, hop](const Vec& g) {
                   TvBiquadGrad r = tv_biquad_vjp(in, *frames, hop, *y, g);
                   Vec gc(5 * r.frames.size());
                   for (std::size_t j = 0; j < r.frames.size(); ++j) {
                     gc[5 * j + 0] = r.frames[j].b0;
                     gc[5 * j + 1] = r.frames[j].b1;
                     gc[5 * j + 2] = r.frames[j].b2;
                     gc[5 * j + 3] = r.frames[j].a1;
                     gc[5 * j + 4] = r.frames[j].a2;
                   }
                   return std::vector<Vec>{std::move(r.x), std::move(gc)};
                 });
}

Var multiply(Tape& t, Var a, Var b) {
  Vec va = t.value(a), vb = t.value(b);
  Vec out = apply_envelope(va, vb);
  return t.apply("multiply", {a, b}, std::move(out),
                 [va = std::move(va), vb = std::move(vb)](const Vec& g) {
                   Vec ga(g.size()), gb(g.size());
                   for (std::size_t i = 0; i < g.size(); ++i) {
                     ga[i] = g[i] * vb[i];
                     gb[i] = g[i] * va[i];
                   }
                   return std::vector<Vec>{std::move(ga), std::move(gb)};
                 });
}

Var mss(Tape& t, Var x, const MssLoss& loss) {
  auto grad = std::make_shared<Vec>();
  const double value = loss.value_and_grad(t.value(x), *grad);
  return t.apply("mss", {x}, Vec{value}, [grad](const Vec& g) {
    Vec gi(*grad);
    for (double& v : gi) v *= g[0];
    return std::vector<Vec>{std::move(gi)};
  });
}

}  // namespace ops
}  // namespace moddisc
