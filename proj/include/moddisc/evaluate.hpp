#pragma once

// Metric reports comparing fitted mod signals with dataset ground truth.
//
// Ground truth is the stored <dataset>/<entry>/{add,sub,env}.csv. Fits are
// read from <fits>/<method>/<entry>/{add,sub,env}.csv, with an optional
// render.wav used for the audio metrics.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "moddisc/dataset.hpp"
#include "moddisc/fit.hpp"
#include "moddisc/metrics.hpp"

namespace moddisc {

inline constexpr const char* kRoles[3] = {"add", "sub", "env"};

struct MetricRow {
  std::string entry;   // entry name, or "mean" / "std" for aggregates
  std::string role;    // add, sub, env, or "all" for aggregates
  std::string method;  // fit directory name or rand_spline / rand_frame
  std::string proc;    // raw, lls1 or lls3
  DistanceQuad dist;
  SignalStats stats;  // of the unaligned prediction
  double tp = 0.0;    // stats.turning_points, or its mean / std in aggregates
  std::vector<double> lls_weights;
  double lls_bias = 0.0;
  double lls_residual = 0.0;
  double mss = 0.0;      // render vs target audio; NaN when unavailable
  double mfcc_l1 = 0.0;  // same
};

struct EvalOptions {
  FitMode mode = FitMode::Extraction;
  /// Methods to read from the fits directory; empty means every subdirectory.
  std::vector<std::string> methods;
  bool baselines = true;
  bool audio_metrics = true;
  std::uint64_t baseline_seed = 0x5eed;
};

struct MetricReport {
  FitMode mode = FitMode::Extraction;
  std::vector<MetricRow> rows;        // per-entry rows
  std::vector<MetricRow> aggregates;  // mean and std rows
  std::vector<std::string> skipped;   // "<method>/<entry>: reason"
};

/// Processing variants per mode: {"raw"} or {"lls1", "lls3"}.
std::vector<std::string> eval_procs(FitMode mode);

/// Rows for one prediction triple against ground truth (all procs, 3 roles).
std::vector<MetricRow> evaluate_triple(const std::string& entry, const std::string& method,
                                       const ModSet& predicted, const ModSet& truth, FitMode mode);

/// Random baselines for one entry: a random Bezier curve and i.i.d. uniform
/// frames per role, drawn from a stream derived from `seed`.
ModSet random_spline_mods(std::uint64_t seed, std::size_t frames, double rate_hz);
ModSet random_frame_mods(std::uint64_t seed, std::size_t frames, double rate_hz);

/// Mean and sample std per (method, proc, role) and per (method, proc) over
/// all roles, skipping NaN values.
std::vector<MetricRow> aggregate_rows(const std::vector<MetricRow>& rows);

MetricReport evaluate(const Dataset& data, const std::filesystem::path& fits_dir,
                      const EvalOptions& opt = {});

/// CSV with '#' header lines documenting the reductions.
std::string report_to_csv(const MetricReport& report);

}  // namespace moddisc
