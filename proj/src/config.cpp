#include "rfaug/config.hpp"

#include <fstream>
#include <set>
#include <string>

#include "rfaug/errors.hpp"

namespace rfaug {
namespace {

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                         const std::string& section) {
  for (const auto& [key, value] : j.items())
    if (!known.contains(key))
      throw ConfigError("unknown config key \"" + (section.empty() ? key : section + "." + key) +
                        "\"");
}

}  // namespace

Layout parse_layout(std::string_view name) {
  if (name == "channel_stack") return Layout::channel_stack;
  if (name == "per_sample") return Layout::per_sample;
  throw ConfigError("unknown layout \"" + std::string(name) + "\"");
}

std::string_view to_string(Layout layout) {
  return layout == Layout::channel_stack ? "channel_stack" : "per_sample";
}

void PipelineConfig::validate() const {
  stft.validate();
  windows.validate();
  mda.validate();
  if (!(ms_window_s > 0.0)) throw ConfigError("ms_window_s must be positive");
  if (fda.k < 1) throw ConfigError("fda.k must be >= 1");
  if (fda.g_count < 1) throw ConfigError("fda.g_count must be >= 1");
  if (fda.top < 1 || fda.top > fda.g_count)
    throw ConfigError("fda.top must satisfy 1 <= top <= g_count");
  if (plan.tda < 0 || plan.mda < 0 || plan.gsm < 0)
    throw ConfigError("plan counts must be >= 0");
  if (plan.tda > 2)
    throw ConfigError("plan.tda supports at most 2 variants (lengthened, shortened)");
  if (out.t_out < 1) throw ConfigError("export.t_out must be >= 1");
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig cfg;
  reject_unknown_keys(j, {"stft", "windows", "fda", "mda", "plan", "export"}, "");
  try {
    if (j.contains("stft")) {
      const auto& s = j["stft"];
      reject_unknown_keys(s,
                          {"window_len", "hop", "n_dft", "window_fn", "input_mode", "crop_hz",
                           "fold_longer_windows", "ms_window_s"},
                          "stft");
      cfg.stft.window_len = s.value("window_len", cfg.stft.window_len);
      cfg.stft.hop = s.value("hop", cfg.stft.hop);
      cfg.stft.n_dft = s.value("n_dft", cfg.stft.n_dft);
      if (s.contains("window_fn")) cfg.stft.window_fn = parse_window_fn(s["window_fn"].get<std::string>());
      if (s.contains("input_mode"))
        cfg.stft.input_mode = parse_input_mode(s["input_mode"].get<std::string>());
      cfg.stft.crop_hz = s.value("crop_hz", cfg.stft.crop_hz);
      cfg.stft.fold_longer_windows = s.value("fold_longer_windows", cfg.stft.fold_longer_windows);
      cfg.ms_window_s = s.value("ms_window_s", cfg.ms_window_s);
    }
    if (j.contains("windows")) {
      const auto& w = j["windows"];
      reject_unknown_keys(w, {"default_len", "lengthened_len", "shortened_len"}, "windows");
      cfg.windows.default_len = w.value("default_len", cfg.windows.default_len);
      cfg.windows.lengthened_len = w.value("lengthened_len", cfg.windows.lengthened_len);
      cfg.windows.shortened_len = w.value("shortened_len", cfg.windows.shortened_len);
    }
    if (j.contains("fda")) {
      const auto& f = j["fda"];
      reject_unknown_keys(f, {"k", "g_count", "top", "per_link_grouping", "normalized_mrc"}, "fda");
      cfg.fda.k = f.value("k", cfg.fda.k);
      cfg.fda.g_count = f.value("g_count", cfg.fda.g_count);
      cfg.fda.top = f.value("top", cfg.fda.top);
      cfg.fda.per_link_grouping = f.value("per_link_grouping", cfg.fda.per_link_grouping);
      cfg.fda.normalized_mrc = f.value("normalized_mrc", cfg.fda.normalized_mrc);
    }
    if (j.contains("mda")) {
      const auto& m = j["mda"];
      reject_unknown_keys(m, {"erase_min_frac", "erase_max_frac", "fill"}, "mda");
      cfg.mda.erase_min_frac = m.value("erase_min_frac", cfg.mda.erase_min_frac);
      cfg.mda.erase_max_frac = m.value("erase_max_frac", cfg.mda.erase_max_frac);
      if (m.contains("fill")) cfg.mda.fill = parse_fill_mode(m["fill"].get<std::string>());
    }
    if (j.contains("plan")) {
      const auto& p = j["plan"];
      reject_unknown_keys(p, {"tda", "mda", "gsm"}, "plan");
      cfg.plan.tda = p.value("tda", cfg.plan.tda);
      cfg.plan.mda = p.value("mda", cfg.plan.mda);
      cfg.plan.gsm = p.value("gsm", cfg.plan.gsm);
    }
    if (j.contains("export")) {
      const auto& e = j["export"];
      reject_unknown_keys(e, {"t_out", "layout", "cache_dir", "cache_cap_bytes"}, "export");
      cfg.out.t_out = e.value("t_out", cfg.out.t_out);
      if (e.contains("layout")) cfg.out.layout = parse_layout(e["layout"].get<std::string>());
      cfg.out.cache_dir = e.value("cache_dir", cfg.out.cache_dir);
      cfg.out.cache_cap_bytes = e.value("cache_cap_bytes", cfg.out.cache_cap_bytes);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config json invalid: " + std::string(e.what()));
  }
  cfg.validate();
  return cfg;
}

nlohmann::ordered_json config_to_json(const PipelineConfig& cfg) {
  nlohmann::ordered_json j;
  j["stft"] = {{"window_len", cfg.stft.window_len},
               {"hop", cfg.stft.hop},
               {"n_dft", cfg.stft.n_dft},
               {"window_fn", std::string(to_string(cfg.stft.window_fn))},
               {"input_mode", std::string(to_string(cfg.stft.input_mode))},
               {"crop_hz", cfg.stft.crop_hz},
               {"fold_longer_windows", cfg.stft.fold_longer_windows},
               {"ms_window_s", cfg.ms_window_s}};
  j["windows"] = {{"default_len", cfg.windows.default_len},
                  {"lengthened_len", cfg.windows.lengthened_len},
                  {"shortened_len", cfg.windows.shortened_len}};
  j["fda"] = {{"k", cfg.fda.k},
              {"g_count", cfg.fda.g_count},
              {"top", cfg.fda.top},
              {"per_link_grouping", cfg.fda.per_link_grouping},
              {"normalized_mrc", cfg.fda.normalized_mrc}};
  j["mda"] = {{"erase_min_frac", cfg.mda.erase_min_frac},
              {"erase_max_frac", cfg.mda.erase_max_frac},
              {"fill", std::string(to_string(cfg.mda.fill))}};
  j["plan"] = {{"tda", cfg.plan.tda}, {"mda", cfg.plan.mda}, {"gsm", cfg.plan.gsm}};
  j["export"] = {{"t_out", cfg.out.t_out},
                 {"layout", std::string(to_string(cfg.out.layout))},
                 {"cache_dir", cfg.out.cache_dir},
                 {"cache_cap_bytes", cfg.out.cache_cap_bytes}};
  return j;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config json unparsable: " + std::string(e.what()));
  }
  return config_from_json(j);
}

void apply_override(nlohmann::json& j, std::string_view dotted_key, std::string_view value) {
  nlohmann::json* node = &j;
  std::string_view rest = dotted_key;
  for (std::size_t dot = rest.find('.'); dot != std::string_view::npos; dot = rest.find('.')) {
    node = &(*node)[std::string(rest.substr(0, dot))];
    rest.remove_prefix(dot + 1);
  }
  if (rest.empty()) throw ConfigError("empty config override key");
  nlohmann::json parsed = nlohmann::json::parse(value, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) parsed = std::string(value);
  (*node)[std::string(rest)] = std::move(parsed);
}

}  // namespace rfaug
