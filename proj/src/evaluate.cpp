#include "moddisc/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <map>
#include <random>

#include "moddisc/error.hpp"
#include "moddisc/lls.hpp"
#include "moddisc/losses.hpp"
#include "moddisc/serialize.hpp"
#include "moddisc/wav.hpp"

namespace moddisc {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const ModSignal& role_of(const ModSet& m, std::size_t r) { return r == 0 ? m.add : (r == 1 ? m.sub : m.env); }

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::vector<std::string> eval_procs(FitMode mode) {
  if (mode == FitMode::Extraction) return {"raw"};
  return {"lls1", "lls3"};
}

std::vector<MetricRow> evaluate_triple(const std::string& entry, const std::string& method,
                                       const ModSet& predicted, const ModSet& truth, FitMode mode) {
  std::vector<MetricRow> rows;
  for (std::size_t r = 0; r < 3; ++r) {
    const ModSignal& pred = role_of(predicted, r);
    const ModSignal& ref = role_of(truth, r);
    if (pred.values.size() != ref.values.size())
      detail::throw_shape(method + "/" + entry + "/" + kRoles[r] + ": frame count " +
                          std::to_string(pred.values.size()) + " != " + std::to_string(ref.values.size()));
    const SignalStats stats = signal_stats(pred.values, ref.rate_hz);
    for (const std::string& proc : eval_procs(mode)) {
      MetricRow row;
      row.entry = entry;
      row.role = kRoles[r];
      row.method = method;
      row.proc = proc;
      row.stats = stats;
      row.tp = static_cast<double>(stats.turning_points);
      row.mss = row.mfcc_l1 = kNaN;
      if (proc == "raw") {
        row.dist = distance_quad(pred.values, ref.values, ref.rate_hz);
        row.lls_weights = {1.0};
        row.lls_residual = kNaN;
      } else {
        LlsFit f;
        if (proc == "lls1") {
          f = lls_align(pred.values, ref.values);
        } else {
          const std::span<const double> src[] = {predicted.add.values, predicted.sub.values,
                                                 predicted.env.values};
          f = lls_align(src, ref.values);
        }
        row.dist = distance_quad(f.aligned, ref.values, ref.rate_hz);
        row.lls_weights = f.weights;
        row.lls_bias = f.bias;
        row.lls_residual = f.residual_rms;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

ModSet random_spline_mods(std::uint64_t seed, std::size_t frames, double rate_hz) {
  std::mt19937_64 rng(seed);
  ModSet m;
  m.add = render_spline(random_mod_curve(rng), frames, 1.0, rate_hz);
  m.sub = render_spline(random_mod_curve(rng), frames, 1.0, rate_hz);
  m.env = render_spline(random_mod_curve(rng), frames, 1.0, rate_hz);
  return m;
}

ModSet random_frame_mods(std::uint64_t seed, std::size_t frames, double rate_hz) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto draw = [&] {
    ModSignal s;
    s.rate_hz = rate_hz;
    s.values.resize(frames);
    for (double& v : s.values) v = u(rng);
    return s;
  };
  ModSet m;
  m.add = draw();
  m.sub = draw();
  m.env = draw();
  return m;
}

std::vector<MetricRow> aggregate_rows(const std::vector<MetricRow>& rows) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, std::vector<const MetricRow*>> groups;
  for (const MetricRow& r : rows) {
    groups[{r.method, r.proc, r.role}].push_back(&r);
    groups[{r.method, r.proc, "all"}].push_back(&r);
  }
  auto field = [](const MetricRow& r, int k) -> double {
    switch (k) {
      case 0: return r.dist.l1;
      case 1: return r.dist.grad_l1;
      case 2: return r.dist.pcc;
      case 3: return r.dist.frechet;
      case 4: return r.stats.total_variation;
      case 5: return r.tp;
      case 6: return r.stats.spectral_entropy;
      case 7: return r.lls_residual;
      case 8: return r.mss;
      default: return r.mfcc_l1;
    }
  };
  constexpr int kFields = 10;
  std::vector<MetricRow> out;
  for (const auto& [key, members] : groups) {
    double mean[kFields], sd[kFields];
    for (int k = 0; k < kFields; ++k) {
      double sum = 0.0, sq = 0.0;
      std::size_t n = 0;
      for (const MetricRow* r : members) {
        const double v = field(*r, k);
        if (std::isnan(v)) continue;
        sum += v;
        ++n;
      }
      mean[k] = n ? sum / static_cast<double>(n) : kNaN;
      for (const MetricRow* r : members) {
        const double v = field(*r, k);
        if (!std::isnan(v)) sq += (v - mean[k]) * (v - mean[k]);
      }
      sd[k] = n > 1 ? std::sqrt(sq / static_cast<double>(n - 1)) : (n == 1 ? 0.0 : kNaN);
    }
    for (int which = 0; which < 2; ++which) {
      const double* v = which == 0 ? mean : sd;
      MetricRow row;
      row.entry = which == 0 ? "mean" : "std";
      std::tie(row.method, row.proc, row.role) = key;
      row.dist = {v[0], v[1], v[2], v[3]};
      row.stats.total_variation = v[4];
      row.stats.spectral_entropy = v[6];
      row.lls_bias = kNaN;
      row.lls_residual = v[7];
      row.mss = v[8];
      row.mfcc_l1 = v[9];
      row.tp = v[5];
      out.push_back(std::move(row));
    }
  }
  return out;
}

MetricReport evaluate(const Dataset& data, const fs::path& fits_dir, const EvalOptions& opt) {
  MetricReport rep;
  rep.mode = opt.mode;
  std::vector<std::string> methods = opt.methods;
  if (methods.empty()) {
    if (!fs::is_directory(fits_dir)) throw IoError("fits directory '" + fits_dir.string() + "' not found");
    for (const auto& d : fs::directory_iterator(fits_dir))
      if (d.is_directory()) methods.push_back(d.path().filename().string());
    std::sort(methods.begin(), methods.end());
  }
  const double rate = data.config.sample_rate / static_cast<double>(data.config.hop);
  const std::size_t frames = data.config.frames();
  for (std::size_t i = 0; i < data.entries.size(); ++i) {
    const std::string& name = data.entries[i];
    const fs::path entry_dir = data.dir / name;
    const ModSet truth{load_mod_signal(entry_dir / "add.csv", frames, rate),
                       load_mod_signal(entry_dir / "sub.csv", frames, rate),
                       load_mod_signal(entry_dir / "env.csv", frames, rate)};
    std::vector<double> target;
    if (opt.audio_metrics) target = read_wav(entry_dir / "audio.wav").samples;
    for (const std::string& method : methods) {
      const fs::path dir = fits_dir / method / name;
      ModSet pred;
      try {
        pred.add = load_mod_signal(dir / "add.csv", frames, rate);
        pred.sub = load_mod_signal(dir / "sub.csv", frames, rate);
        pred.env = load_mod_signal(dir / "env.csv", frames, rate);
        auto rows = evaluate_triple(name, method, pred, truth, opt.mode);
        if (opt.audio_metrics && fs::exists(dir / "render.wav")) {
          const std::vector<double> render = read_wav(dir / "render.wav").samples;
          if (render.size() == target.size()) {
            const double m = mss_loss(render, target);
            const double c = mfcc_l1(render, target);
            for (MetricRow& r : rows) {
              r.mss = m;
              r.mfcc_l1 = c;
            }
          }
        }
        rep.rows.insert(rep.rows.end(), rows.begin(), rows.end());
      } catch (const Error& e) {
        rep.skipped.push_back(method + "/" + name + ": " + e.what());
        std::cerr << "eval: skipping " << method << "/" << name << ": " << e.what() << "\n";
      }
    }
    if (opt.baselines) {
      const std::uint64_t s = entry_seed(opt.baseline_seed, i);
      for (auto& r : evaluate_triple(name, "rand_spline", random_spline_mods(s, frames, rate), truth, opt.mode))
        rep.rows.push_back(std::move(r));
      for (auto& r : evaluate_triple(name, "rand_frame", random_frame_mods(s ^ 0xF00DULL, frames, rate), truth,
                                     opt.mode))
        rep.rows.push_back(std::move(r));
    }
  }
  rep.aggregates = aggregate_rows(rep.rows);
  return rep;
}

std::string report_to_csv(const MetricReport& rep) {
  std::string out;
  out += "# mode=" + to_string(rep.mode) + "\n";
  out += "# l1, grad_l1: mean absolute difference over frames, reported x100; grad_l1 uses central "
         "differences scaled to per-second units\n";
  out += "# tv: total variation per second; tp: turning points; se: normalized spectral entropy; stats "
         "describe the unaligned prediction\n";
  out += "# proc raw: prediction as fitted; lls1: affine fit of the same role; lls3: affine fit of all "
         "three predicted signals\n";
  out += "# mss, mfcc_l1: fit render vs target audio; mean/std rows skip NaN, std is the sample std\n";
  out += "entry,role,method,proc,l1,grad_l1,pcc,frechet,tv,tp,se,lls_weights,lls_bias,lls_residual,mss,"
         "mfcc_l1\n";
  auto emit = [&](const MetricRow& r, bool aggregate) {
    std::string w;
    if (!aggregate)
      for (std::size_t k = 0; k < r.lls_weights.size(); ++k) w += (k ? ";" : "") + fmt(r.lls_weights[k]);
    out += r.entry + "," + r.role + "," + r.method + "," + r.proc + "," + fmt(100.0 * r.dist.l1) + "," +
           fmt(100.0 * r.dist.grad_l1) + "," + fmt(r.dist.pcc) + "," + fmt(r.dist.frechet) + "," +
           fmt(r.stats.total_variation) + "," + fmt(r.tp) + "," + fmt(r.stats.spectral_entropy) + "," + w + "," +
           fmt(aggregate ? kNaN : r.lls_bias) + "," + fmt(r.lls_residual) + "," + fmt(r.mss) + "," +
           fmt(r.mfcc_l1) + "\n";
  };
  for (const MetricRow& r : rep.rows) emit(r, false);
  for (const MetricRow& r : rep.aggregates) emit(r, true);
  return out;
}

}  // namespace moddisc
