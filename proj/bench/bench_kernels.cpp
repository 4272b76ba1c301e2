// Serial reference kernels against their OpenMP counterparts at the sizes
// used by a 3 s fit (144000 samples, hop 96, default MSS resolutions).

#include <benchmark/benchmark.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "moddisc/kernels.hpp"

namespace k = moddisc::kernels;

namespace {

constexpr std::size_t kSamples = 144000;

std::vector<double> noise(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

struct StftFixture {
  std::size_t fft;
  std::vector<double> window, padded;
  k::StftGeometry geom;
  std::vector<std::complex<double>> spec;
  std::vector<double> target_mag, target_log;

  explicit StftFixture(std::size_t fft_size) : fft(fft_size) {
    window.resize(fft);
    for (std::size_t i = 0; i < fft; ++i) window[i] = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * i / fft);
    const std::size_t hop = fft / 4;
    padded = noise(kSamples + fft, 1);
    geom = {fft, hop, kSamples / hop + 1, window};
    spec.resize(geom.frames * geom.bins());
    k::stft_serial(padded, geom, spec);
    const auto t = noise(spec.size(), 2);
    target_mag.resize(spec.size());
    target_log.resize(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
      target_mag[i] = std::abs(t[i]);
      target_log[i] = std::log(target_mag[i] + 1e-7);
    }
  }
  k::SpectralTermsInput terms() const { return {spec, target_mag, target_log, geom.frames, geom.bins(), 1e-7}; }
};

template <bool Parallel>
void BM_Stft(benchmark::State& state) {
  StftFixture f(static_cast<std::size_t>(state.range(0)));
  std::vector<std::complex<double>> out(f.spec.size());
  for (auto _ : state) {
    if constexpr (Parallel) k::stft_parallel(f.padded, f.geom, out);
    else k::stft_serial(f.padded, f.geom, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_StftAdjoint(benchmark::State& state) {
  StftFixture f(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(f.padded.size());
  for (auto _ : state) {
    if constexpr (Parallel) k::stft_adjoint_parallel(f.spec, f.geom, out);
    else k::stft_adjoint_serial(f.spec, f.geom, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_SpectralTerms(benchmark::State& state) {
  StftFixture f(static_cast<std::size_t>(state.range(0)));
  std::vector<double> sq(f.geom.frames), lg(f.geom.frames);
  const auto in = f.terms();
  for (auto _ : state) {
    if constexpr (Parallel) k::spectral_terms_parallel(in, sq, lg);
    else k::spectral_terms_serial(in, sq, lg);
    benchmark::DoNotOptimize(sq.data());
  }
}

template <bool Parallel>
void BM_SpectralGrad(benchmark::State& state) {
  StftFixture f(static_cast<std::size_t>(state.range(0)));
  std::vector<std::complex<double>> g(f.spec.size());
  const auto in = f.terms();
  for (auto _ : state) {
    if constexpr (Parallel) k::spectral_grad_parallel(in, 0.01, 1e-5, g);
    else k::spectral_grad_serial(in, 0.01, 1e-5, g);
    benchmark::DoNotOptimize(g.data());
  }
}

template <bool Parallel>
void BM_Fir(benchmark::State& state) {
  const auto taps = noise(63, 3);
  const auto x = noise(1501 + 62, 4);
  std::vector<double> out(1501);
  for (auto _ : state) {
    if constexpr (Parallel) k::fir_valid_parallel(x, taps, out);
    else k::fir_valid_serial(x, taps, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_WavetableRead(benchmark::State& state) {
  const auto table = noise(16 * 1024, 5);
  const k::WavetableView wt{table, 16, 1024};
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> pos(0.0, 15.0), ph(0.0, 1.0);
  std::vector<double> p(kSamples), f(kSamples), out(kSamples);
  for (auto& v : p) v = pos(rng);
  for (auto& v : f) v = ph(rng);
  for (auto _ : state) {
    if constexpr (Parallel) k::wavetable_read_parallel(wt, p, f, out);
    else k::wavetable_read_serial(wt, p, f, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_Stft<false>)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Stft<true>)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StftAdjoint<false>)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StftAdjoint<true>)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpectralTerms<false>)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpectralTerms<true>)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpectralGrad<false>)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpectralGrad<true>)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Fir<false>)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Fir<true>)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_WavetableRead<false>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WavetableRead<true>)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
