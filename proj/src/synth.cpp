#include "rfaug/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "json.hpp"
#include "rfaug/errors.hpp"
#include "rfaug/rng.hpp"

namespace rfaug {
namespace {

// Phase accumulated by a piecewise-constant Doppler profile up to time t.
class DopplerPhase {
 public:
  explicit DopplerPhase(const std::vector<DopplerSegment>& segments) : segments_(segments) {
    accum_.resize(segments_.size(), 0.0);
    for (std::size_t i = 1; i < segments_.size(); ++i)
      accum_[i] = accum_[i - 1] +
                  segments_[i - 1].hz * (segments_[i].start_s - segments_[i - 1].start_s);
  }

  double at(double t) const {
    if (segments_.empty()) return 0.0;
    std::size_t i = segments_.size();
    while (i > 0 && segments_[i - 1].start_s > t) --i;
    if (i == 0) return 0.0;
    const std::size_t k = i - 1;
    const double cycles = accum_[k] + segments_[k].hz * (t - segments_[k].start_s);
    return 2.0 * std::numbers::pi * cycles;
  }

  bool moving() const {
    return std::any_of(segments_.begin(), segments_.end(),
                       [](const DopplerSegment& s) { return s.hz != 0.0; });
  }

 private:
  std::vector<DopplerSegment> segments_;
  std::vector<double> accum_;
};

}  // namespace

void SceneSpec::validate() const {
  if (!(duration_s > 0.0)) throw ConfigError("scene duration must be positive");
  if (!(sample_rate_hz > 0.0)) throw ConfigError("scene sample rate must be positive");
  if (noise_sigma < 0.0) throw ConfigError("noise sigma must be >= 0");
  if (f_count < 1 || l_count < 1) throw ConfigError("scene needs F >= 1 and L >= 1");
  if (!sensitivity.empty() && sensitivity.size() != static_cast<std::size_t>(f_count))
    throw ConfigError("sensitivity vector length must equal f_count");
  if (!(subcarrier_spacing_hz > 0.0)) throw ConfigError("subcarrier spacing must be positive");
  if (duration_s * sample_rate_hz < 2.0) throw ConfigError("scene must span at least 2 packets");
  for (const ScenePath& p : paths) {
    if (!(p.active_end_s > p.active_start_s)) throw ConfigError("path active interval is empty");
    for (std::size_t i = 1; i < p.doppler.size(); ++i)
      if (p.doppler[i].start_s <= p.doppler[i - 1].start_s)
        throw ConfigError("doppler segments must have increasing start times");
  }
}

std::pair<CsiTensor, GroundTruth> generate(const SceneSpec& scene, std::uint64_t seed) {
  scene.validate();

  const auto t_count = static_cast<std::size_t>(std::llround(scene.duration_s * scene.sample_rate_hz));
  const auto f_count = static_cast<std::size_t>(scene.f_count);
  const auto l_count = static_cast<std::size_t>(scene.l_count);

  CsiTensor tensor;
  tensor.t_count = static_cast<std::uint32_t>(t_count);
  tensor.f_count = static_cast<std::uint32_t>(f_count);
  tensor.l_count = static_cast<std::uint32_t>(l_count);
  tensor.sample_rate_hz = scene.sample_rate_hz;
  tensor.data.assign(t_count * f_count * l_count, {0.0, 0.0});

  std::vector<double> gain = scene.sensitivity;
  if (gain.empty()) gain.assign(f_count, 1.0);

  GroundTruth truth;
  std::vector<DopplerPhase> phases;
  phases.reserve(scene.paths.size());
  for (const ScenePath& p : scene.paths) {
    phases.emplace_back(p.doppler);
    PathTruth pt;
    pt.moving = phases.back().moving();
    pt.doppler = p.doppler;
    pt.active_start_s = std::max(0.0, p.active_start_s);
    pt.active_end_s = std::min(scene.duration_s, p.active_end_s);
    truth.paths.push_back(pt);
    if (pt.moving) {
      if (!truth.has_motion) {
        truth.has_motion = true;
        truth.motion_start_s = pt.active_start_s;
        truth.motion_end_s = pt.active_end_s;
      } else {
        truth.motion_start_s = std::min(truth.motion_start_s, pt.active_start_s);
        truth.motion_end_s = std::max(truth.motion_end_s, pt.active_end_s);
      }
    }
  }

  // Per-path, per-subcarrier factor a_m * gain(f) * exp(-j 2 pi f_c(f) tau_m).
  std::vector<std::vector<std::complex<double>>> path_gain(scene.paths.size());
  for (std::size_t m = 0; m < scene.paths.size(); ++m) {
    path_gain[m].resize(f_count);
    for (std::size_t f = 0; f < f_count; ++f) {
      const double fc =
          scene.carrier_hz + static_cast<double>(f) * scene.subcarrier_spacing_hz;
      const double phase = -2.0 * std::numbers::pi * fc * scene.paths[m].delay_s;
      path_gain[m][f] = scene.paths[m].amplitude * gain[f] *
                        std::complex<double>(std::cos(phase), std::sin(phase));
    }
  }

  std::mt19937_64 rng(seed);
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  for (std::size_t t = 0; t < t_count; ++t) {
    const double time = static_cast<double>(t) / scene.sample_rate_hz;
    std::vector<std::complex<double>> column(f_count, {0.0, 0.0});
    for (std::size_t m = 0; m < scene.paths.size(); ++m) {
      const ScenePath& p = scene.paths[m];
      if (time < p.active_start_s || time >= p.active_end_s) continue;
      const double phi = phases[m].at(time);
      const std::complex<double> rot(std::cos(phi), std::sin(phi));
      for (std::size_t f = 0; f < f_count; ++f) column[f] += path_gain[m][f] * rot;
    }
    for (std::size_t f = 0; f < f_count; ++f) {
      for (std::size_t l = 0; l < l_count; ++l) {
        std::complex<double> value = column[f];
        if (scene.noise_sigma > 0.0) {
          const auto [g1, g2] = gaussian_pair(rng);
          value += scene.noise_sigma * inv_sqrt2 * std::complex<double>(g1, g2);
        }
        tensor.at(t, f, l) = value;
      }
    }
  }
  return {std::move(tensor), std::move(truth)};
}

SceneSpec load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("scene json unparsable: " + std::string(e.what()));
  }

  SceneSpec scene;
  try {
    scene.duration_s = j.at("duration_s").get<double>();
    scene.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    scene.noise_sigma = j.value("noise_sigma", 0.0);
    scene.f_count = j.value("f_count", 1);
    scene.l_count = j.value("l_count", 1);
    scene.subcarrier_spacing_hz = j.value("subcarrier_spacing_hz", 312.5e3);
    scene.carrier_hz = j.value("carrier_hz", 5.8e9);
    if (j.contains("sensitivity")) scene.sensitivity = j["sensitivity"].get<std::vector<double>>();
    for (const auto& pj : j.value("paths", nlohmann::json::array())) {
      ScenePath p;
      if (pj.contains("amplitude")) {
        const auto& a = pj["amplitude"];
        if (a.is_array())
          p.amplitude = {a.at(0).get<double>(), a.at(1).get<double>()};
        else
          p.amplitude = {a.get<double>(), 0.0};
      }
      p.delay_s = pj.value("delay_s", 0.0);
      if (pj.contains("doppler_hz")) {
        const auto& d = pj["doppler_hz"];
        if (d.is_array()) {
          for (const auto& seg : d)
            p.doppler.push_back({seg.at("start_s").get<double>(), seg.at("hz").get<double>()});
        } else if (d.get<double>() != 0.0) {
          p.doppler.push_back({0.0, d.get<double>()});
        }
      }
      if (pj.contains("active")) {
        p.active_start_s = pj["active"].at(0).get<double>();
        p.active_end_s = pj["active"].at(1).get<double>();
      }
      scene.paths.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("scene json invalid: " + std::string(e.what()));
  }
  scene.validate();
  return scene;
}

void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["has_motion"] = truth.has_motion;
  j["motion_start_s"] = truth.motion_start_s;
  j["motion_end_s"] = truth.motion_end_s;
  j["paths"] = nlohmann::ordered_json::array();
  for (const PathTruth& p : truth.paths) {
    nlohmann::ordered_json pj;
    pj["moving"] = p.moving;
    pj["active"] = {p.active_start_s, p.active_end_s};
    pj["doppler_hz"] = nlohmann::ordered_json::array();
    for (const DopplerSegment& s : p.doppler)
      pj["doppler_hz"].push_back({{"start_s", s.start_s}, {"hz", s.hz}});
    j["paths"].push_back(std::move(pj));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace rfaug
