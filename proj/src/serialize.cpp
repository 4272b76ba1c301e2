#include "moddisc/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "moddisc/error.hpp"
#include "moddisc/wav.hpp"

namespace moddisc {

Json curve_to_json(const PiecewiseBezier& curve) {
  Json segs = Json::array();
  for (int k = 0; k < curve.segments(); ++k) {
    Json pts = Json::array();
    for (const Point2& p : curve.segment(k)) pts.push_back({p.x, p.y});
    segs.push_back(std::move(pts));
  }
  return Json{{"degree", curve.degree()}, {"knots", curve.knots()}, {"points", std::move(segs)}};
}

PiecewiseBezier curve_from_json(const Json& j) {
  try {
    const int degree = j.at("degree").get<int>();
    const Json& segs = j.at("points");
    if (degree < 1) throw ValidationError("curve degree must be >= 1");
    if (!segs.is_array() || segs.empty()) throw ValidationError("curve has no segments");
    std::vector<Point2> points;
    for (std::size_t k = 0; k < segs.size(); ++k) {
      const Json& seg = segs[k];
      if (!seg.is_array() || seg.size() != static_cast<std::size_t>(degree + 1))
        throw ValidationError("segment " + std::to_string(k) + " must have degree + 1 points");
      for (std::size_t i = 0; i < seg.size(); ++i) {
        const Point2 p{seg[i].at(0).get<double>(), seg[i].at(1).get<double>()};
        if (k > 0 && i == 0) {
          if (!(p == points.back()))
            throw ValidationError("segment " + std::to_string(k) + " does not start at the previous end point");
          continue;
        }
        points.push_back(p);
      }
    }
    PiecewiseBezier curve(degree, std::move(points));
    if (j.contains("knots")) {
      const auto knots = j.at("knots").get<std::vector<double>>();
      if (knots != curve.knots()) throw ValidationError("knots disagree with segment end points");
    }
    return curve;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed curve JSON: ") + e.what());
  } catch (const ShapeError& e) {
    throw ValidationError(std::string("malformed curve JSON: ") + e.what());
  }
}

Json mod_signal_to_json(const ModSignal& s) {
  return Json{{"rate_hz", s.rate_hz}, {"values", s.values}};
}

ModSignal mod_signal_from_json(const Json& j) {
  try {
    ModSignal s{j.at("values").get<std::vector<double>>(), j.value("rate_hz", kDefaultControlRate)};
    s.validate();
    return s;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed mod-signal JSON: ") + e.what());
  }
}

std::string mod_signal_to_csv(const ModSignal& s) {
  std::string out = "# rate_hz=" + std::to_string(s.rate_hz) + "\nframe,value\n";
  char buf[64];
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g\n", i, s.values[i]);
    out += buf;
  }
  return out;
}

ModSignal mod_signal_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  ModSignal s;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("rate_hz=");
      if (pos != std::string::npos) s.rate_hz = std::stod(line.substr(pos + 8));
      continue;
    }
    if (!header) {
      header = true;
      if (line.find_first_not_of("0123456789.,-+eE ") != std::string::npos) continue;
    }
    const auto comma = line.find(',');
    const std::string field = comma == std::string::npos ? line : line.substr(comma + 1);
    try {
      s.values.push_back(std::stod(field));
    } catch (const std::exception&) {
      throw ValidationError("malformed mod-signal CSV line: '" + line + "'");
    }
  }
  if (s.values.empty()) throw ValidationError("mod-signal CSV has no values");
  s.validate();
  return s;
}

Json fit_config_to_json(const FitConfig& cfg) {
  Json res = Json::array();
  for (const auto& r : cfg.loss.resolutions) res.push_back({r.fft_size, r.hop, r.win_length});
  return Json{{"parameterization", to_string(cfg.parameterization)},
              {"mode", to_string(cfg.mode)},
              {"steps", cfg.steps},
              {"lr_mods", cfg.lr_mods},
              {"lr_synth", cfg.lr_synth},
              {"lr_final_fraction", cfg.lr_final_fraction},
              {"noise_sigma", cfg.noise_sigma},
              {"lpf_cutoff_hz", cfg.lpf.cutoff_hz},
              {"lpf_taps", cfg.lpf.taps},
              {"spline_segments", cfg.spline_segments},
              {"spline_degree", cfg.spline_degree},
              {"mss_resolutions", std::move(res)},
              {"mss_mag_floor", cfg.loss.mag_floor},
              {"seed", cfg.seed},
              {"wavetable_positions", cfg.wavetable_positions},
              {"wavetable_init_sigma", cfg.wavetable_init_sigma}};
}

FitConfig fit_config_from_json(const Json& j, FitConfig cfg) {
  try {
    if (!j.is_object()) throw ConfigError("fit config must be a JSON object");
    static const char* known[] = {"parameterization", "mode", "steps", "lr_mods", "lr_synth",
                                  "lr_final_fraction", "noise_sigma", "lpf_cutoff_hz", "lpf_taps",
                                  "spline_segments", "spline_degree", "mss_resolutions",
                                  "mss_mag_floor", "seed", "wavetable_positions",
                                  "wavetable_init_sigma"};
    for (const auto& [key, _] : j.items())
      if (std::find(std::begin(known), std::end(known), key) == std::end(known))
        throw ConfigError("unknown fit config key '" + key + "'");
    if (j.contains("parameterization")) cfg.parameterization = parse_parameterization(j["parameterization"]);
    if (j.contains("mode")) cfg.mode = parse_fit_mode(j["mode"]);
    cfg.steps = j.value("steps", cfg.steps);
    cfg.lr_mods = j.value("lr_mods", cfg.lr_mods);
    cfg.lr_synth = j.value("lr_synth", cfg.lr_synth);
    cfg.lr_final_fraction = j.value("lr_final_fraction", cfg.lr_final_fraction);
    cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
    cfg.lpf.cutoff_hz = j.value("lpf_cutoff_hz", cfg.lpf.cutoff_hz);
    cfg.lpf.taps = j.value("lpf_taps", cfg.lpf.taps);
    cfg.spline_segments = j.value("spline_segments", cfg.spline_segments);
    cfg.spline_degree = j.value("spline_degree", cfg.spline_degree);
    if (j.contains("mss_resolutions")) {
      cfg.loss.resolutions.clear();
      for (const auto& r : j["mss_resolutions"])
        cfg.loss.resolutions.push_back({r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>(),
                                        r.at(2).get<std::size_t>()});
    }
    cfg.loss.mag_floor = j.value("mss_mag_floor", cfg.loss.mag_floor);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.wavetable_positions = j.value("wavetable_positions", cfg.wavetable_positions);
    cfg.wavetable_init_sigma = j.value("wavetable_init_sigma", cfg.wavetable_init_sigma);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed fit config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

Json fit_result_to_json(const FitResult& r, const FitConfig& cfg) {
  Json j{{"parameterization", to_string(r.parameterization)},
         {"mode", to_string(r.mode)},
         {"initial_loss", r.initial_loss},
         {"final_loss", r.final_loss},
         {"best_loss", r.best_loss},
         {"best_step", r.best_step},
         {"q", r.q},
         {"diverged", r.diverged},
         {"message", r.message},
         {"config", fit_config_to_json(cfg)},
         {"loss_history", r.loss_history},
         {"params", {{"add", r.params.add}, {"sub", r.params.sub}, {"env", r.params.env}}},
         {"mods",
          {{"add", mod_signal_to_json(r.mods.add)},
           {"sub", mod_signal_to_json(r.mods.sub)},
           {"env", mod_signal_to_json(r.mods.env)}}}};
  if (!r.curves.empty()) {
    j["curves"] = {{"add", curve_to_json(r.curves[0])},
                   {"sub", curve_to_json(r.curves[1])},
                   {"env", curve_to_json(r.curves[2])}};
  }
  return j;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw ValidationError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(1) + "\n"); }

ModSignal load_mod_signal(const std::filesystem::path& path, std::size_t frames, double rate_hz) {
  const std::string text = read_text(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::exception& e) {
      throw ValidationError("malformed JSON in '" + path.string() + "': " + e.what());
    }
    if (j.contains("degree")) return render_spline(curve_from_json(j), frames, 1.0, rate_hz);
    return mod_signal_from_json(j);
  }
  return mod_signal_from_csv(text);
}

Wavetable load_wavetable_wav(const std::filesystem::path& path) {
  const WavData wav = read_wav(path);
  if (wav.samples.empty() || wav.samples.size() % kWavetableFrameLength != 0)
    throw ValidationError("wavetable '" + path.string() + "' length is not a multiple of " +
                          std::to_string(kWavetableFrameLength));
  return Wavetable(wav.samples.size() / kWavetableFrameLength, wav.samples);
}

void save_wavetable(const std::filesystem::path& wav_path, const Wavetable& wt, double sample_rate) {
  write_wav(wav_path, wt.data(), sample_rate);
  std::filesystem::path sidecar = wav_path;
  sidecar.replace_extension(".json");
  write_json(sidecar, Json{{"positions", wt.positions()}, {"frame_len", wt.frame_length()}});
}

}  // namespace moddisc
