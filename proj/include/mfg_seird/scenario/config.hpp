#pragma once

// Sectioned key = value scenario files ([density], [mfg], [epidemic],
// [output]). Every key has a default; the resolved configuration is echoed
// with all keys explicit and parses back to an identical value.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mfg_seird/error.hpp"
#include "mfg_seird/io.hpp"
#include "mfg_seird/mfg/params.hpp"
#include "mfg_seird/seird/params.hpp"

namespace mfg_seird::scenario {

namespace fs = std::filesystem;

enum class DensitySource { uniform, mfg, file };

struct ScenarioConfig {
  std::string name = "custom";
  DensitySource density_source = DensitySource::mfg;
  fs::path density_file;
  /// "sin_peak", "uniform" or "file" (then amenity_file is read).
  std::string amenity = "sin_peak";
  fs::path amenity_file;
  double amenity_scale = 1.0;
  mfg::MfgParams mfg;
  seird::EpidemicParams epidemic;
  fs::path output_dir = "out";

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

inline std::string to_string(DensitySource s) {
  switch (s) {
    case DensitySource::uniform: return "uniform";
    case DensitySource::mfg: return "mfg";
    case DensitySource::file: return "file";
  }
  return "?";
}

namespace detail {

struct Key {
  std::string name;
  std::function<void(ScenarioConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

struct Section {
  std::string name;
  std::vector<Key> keys;
};

template <class Access>
Key real_key(std::string name, Access access) {
  return {std::move(name),
          [access](ScenarioConfig& c, const std::string& v, const std::string& what) {
            access(c) = io::parse_double(v, what);
          },
          [access](const ScenarioConfig& c) { return io::format_double(access(const_cast<ScenarioConfig&>(c))); }};
}

template <class Access>
Key count_key(std::string name, Access access) {
  return {std::move(name),
          [access](ScenarioConfig& c, const std::string& v, const std::string& what) {
            std::size_t n = 0;
            const auto res = std::from_chars(v.data(), v.data() + v.size(), n);
            if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
              throw ConfigError(what + ": expected a nonnegative integer, got '" + v + "'");
            }
            access(c) = n;
          },
          [access](const ScenarioConfig& c) { return std::to_string(access(const_cast<ScenarioConfig&>(c))); }};
}

template <class Access>
Key bool_key(std::string name, Access access) {
  return {std::move(name),
          [access](ScenarioConfig& c, const std::string& v, const std::string& what) {
            if (v == "true" || v == "1") access(c) = true;
            else if (v == "false" || v == "0") access(c) = false;
            else throw ConfigError(what + ": expected true or false, got '" + v + "'");
          },
          [access](const ScenarioConfig& c) { return access(const_cast<ScenarioConfig&>(c)) ? "true" : "false"; }};
}

template <class T, class Access>
Key choice_key(std::string name, std::vector<std::pair<std::string, T>> choices, Access access) {
  return {std::move(name),
          [access, choices](ScenarioConfig& c, const std::string& v, const std::string& what) {
            for (const auto& [label, value] : choices) {
              if (label == v) {
                access(c) = value;
                return;
              }
            }
            std::string allowed;
            for (const auto& ch : choices) allowed += (allowed.empty() ? "" : "|") + ch.first;
            throw ConfigError(what + ": expected one of " + allowed + ", got '" + v + "'");
          },
          [access, choices](const ScenarioConfig& c) {
            for (const auto& [label, value] : choices) {
              if (value == access(const_cast<ScenarioConfig&>(c))) return label;
            }
            return std::string("?");
          }};
}

template <class Access>
Key path_key(std::string name, Access access) {
  return {std::move(name),
          [access](ScenarioConfig& c, const std::string& v, const std::string&) { access(c) = fs::path(v); },
          [access](const ScenarioConfig& c) { return access(const_cast<ScenarioConfig&>(c)).string(); }};
}

inline Key text_key(std::string name, std::string ScenarioConfig::*member) {
  return {std::move(name), [member](ScenarioConfig& c, const std::string& v, const std::string&) { c.*member = v; },
          [member](const ScenarioConfig& c) { return c.*member; }};
}

#define MFG_SEIRD_FIELD(expr) [](ScenarioConfig & c) -> auto& { return c.expr; }

inline const std::vector<Section>& schema() {
  static const std::vector<Section> sections = [] {
    using seird::BetaArgument;
    using seird::BetaMode;
    std::vector<Section> s;
    s.push_back({"density",
                 {choice_key<DensitySource>("source",
                                            {{"uniform", DensitySource::uniform},
                                             {"mfg", DensitySource::mfg},
                                             {"file", DensitySource::file}},
                                            MFG_SEIRD_FIELD(density_source)),
                  path_key("file", MFG_SEIRD_FIELD(density_file))}});
    s.push_back({"mfg",
                 {real_key("rho", MFG_SEIRD_FIELD(mfg.rho)),
                  real_key("sigma_h", MFG_SEIRD_FIELD(mfg.sigma_h)),
                  real_key("eps_x", MFG_SEIRD_FIELD(mfg.eps_x)),
                  real_key("alpha", MFG_SEIRD_FIELD(mfg.alpha)),
                  real_key("xi_spill", MFG_SEIRD_FIELD(mfg.xi_spill)),
                  real_key("gamma", MFG_SEIRD_FIELD(mfg.gamma)),
                  real_key("zeta", MFG_SEIRD_FIELD(mfg.zeta)),
                  real_key("p_crra", MFG_SEIRD_FIELD(mfg.p_crra)),
                  real_key("v_max", MFG_SEIRD_FIELD(mfg.v_max)),
                  real_key("move_cost_coeff", MFG_SEIRD_FIELD(mfg.move_cost_coeff)),
                  real_key("eta_radius", MFG_SEIRD_FIELD(mfg.eta.eps1)),
                  real_key("eta_floor", MFG_SEIRD_FIELD(mfg.eta.eps2)),
                  real_key("eta_shoulder", MFG_SEIRD_FIELD(mfg.eta.eps3)),
                  text_key("amenity", &ScenarioConfig::amenity),
                  path_key("amenity_file", MFG_SEIRD_FIELD(amenity_file)),
                  real_key("amenity_scale", MFG_SEIRD_FIELD(amenity_scale)),
                  real_key("h_max", MFG_SEIRD_FIELD(mfg.h_max)),
                  count_key("n_x", MFG_SEIRD_FIELD(mfg.n_x)),
                  count_key("n_h", MFG_SEIRD_FIELD(mfg.n_h)),
                  real_key("damping", MFG_SEIRD_FIELD(mfg.damping)),
                  real_key("tol_fixed_point", MFG_SEIRD_FIELD(mfg.tol_fixed_point)),
                  count_key("max_iters", MFG_SEIRD_FIELD(mfg.max_iters)),
                  real_key("tol_inner", MFG_SEIRD_FIELD(mfg.tol_inner)),
                  count_key("max_inner_iters", MFG_SEIRD_FIELD(mfg.max_inner_iters)),
                  bool_key("expand_hmax", MFG_SEIRD_FIELD(mfg.expand_hmax)),
                  real_key("enclosure_band", MFG_SEIRD_FIELD(mfg.enclosure_band)),
                  real_key("enclosure_tol", MFG_SEIRD_FIELD(mfg.enclosure_tol)),
                  real_key("hmax_cap_factor", MFG_SEIRD_FIELD(mfg.hmax_cap_factor))}});
    s.push_back({"epidemic",
                 {real_key("theta", MFG_SEIRD_FIELD(epidemic.theta)),
                  real_key("lambda_rec", MFG_SEIRD_FIELD(epidemic.lambda_rec)),
                  real_key("delta", MFG_SEIRD_FIELD(epidemic.delta)),
                  choice_key<BetaMode>("beta_mode", {{"constant", BetaMode::constant}, {"density", BetaMode::density}},
                                       MFG_SEIRD_FIELD(epidemic.beta_mode)),
                  choice_key<BetaArgument>("beta_argument",
                                           {{"population", BetaArgument::population},
                                            {"living", BetaArgument::living}},
                                           MFG_SEIRD_FIELD(epidemic.beta_argument)),
                  real_key("beta0", MFG_SEIRD_FIELD(epidemic.beta0)),
                  real_key("chi", MFG_SEIRD_FIELD(epidemic.chi)),
                  real_key("i0", MFG_SEIRD_FIELD(epidemic.i0)),
                  real_key("r0", MFG_SEIRD_FIELD(epidemic.r0)),
                  real_key("center", MFG_SEIRD_FIELD(epidemic.center)),
                  real_key("t_end", MFG_SEIRD_FIELD(epidemic.t_end)),
                  real_key("dt", MFG_SEIRD_FIELD(epidemic.dt)),
                  real_key("snapshot_every", MFG_SEIRD_FIELD(epidemic.snapshot_every)),
                  count_key("n_x", MFG_SEIRD_FIELD(epidemic.n_x)),
                  real_key("kernel_smoothing_cells", MFG_SEIRD_FIELD(epidemic.kernel_smoothing_cells)),
                  real_key("cluster_smoothing_cells", MFG_SEIRD_FIELD(epidemic.cluster_smoothing_cells)),
                  real_key("first_passage_threshold", MFG_SEIRD_FIELD(epidemic.first_passage_threshold))}});
    s.push_back({"output", {text_key("name", &ScenarioConfig::name), path_key("dir", MFG_SEIRD_FIELD(output_dir))}});
    return s;
  }();
  return sections;
}

#undef MFG_SEIRD_FIELD

// Drops a trailing "; comment" or "# comment" preceded by whitespace.
inline std::string strip_inline_comment(std::string v) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if ((v[k] == ';' || v[k] == '#') && (v[k - 1] == ' ' || v[k - 1] == '\t')) {
      v.erase(k);
      break;
    }
  }
  while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r')) v.pop_back();
  return v;
}

inline fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty()) return p;
  return (p.is_absolute() ? p : base / p).lexically_normal();
}

}  // namespace detail

/// Applies cross-field rules, resolves paths against base_dir, loads the
/// amenity and validates every section.
inline void finalize(ScenarioConfig& cfg, const fs::path& base_dir) {
  const fs::path base = fs::absolute(base_dir);
  cfg.density_file = detail::resolve(cfg.density_file, base);
  cfg.amenity_file = detail::resolve(cfg.amenity_file, base);
  cfg.output_dir = detail::resolve(cfg.output_dir, base);

  require(cfg.amenity_scale > 0.0, "[mfg] amenity_scale must be positive");
  if (cfg.amenity == "sin_peak") {
    cfg.mfg.amenity = mfg::Amenity::sin_peak(cfg.amenity_scale);
  } else if (cfg.amenity == "uniform") {
    cfg.mfg.amenity = mfg::Amenity::uniform(cfg.amenity_scale);
  } else if (cfg.amenity == "file") {
    require(!cfg.amenity_file.empty(), "[mfg] amenity = file requires amenity_file");
    require(fs::is_regular_file(cfg.amenity_file), "[mfg] amenity_file does not exist: " + cfg.amenity_file.string());
    cfg.mfg.amenity = io::read_amenity(cfg.amenity_file).scaled(cfg.amenity_scale);
  } else {
    throw ConfigError("[mfg] amenity: expected one of sin_peak|uniform|file, got '" + cfg.amenity + "'");
  }

  if (cfg.density_source == DensitySource::file) {
    require(!cfg.density_file.empty(), "[density] source = file requires file");
    require(fs::is_regular_file(cfg.density_file), "[density] file does not exist: " + cfg.density_file.string());
  }
  require(!cfg.name.empty(), "[output] name must not be empty");
  cfg.mfg.validate();
  cfg.epidemic.validate();
  if (cfg.density_source == DensitySource::uniform) {
    require(cfg.epidemic.dt <= seird::max_stable_dt(cfg.epidemic, 1.0) * (1.0 + 1e-12),
            "[epidemic] dt exceeds the stability bound for this density");
  }
}

/// Parses INI text; relative paths are taken relative to base_dir.
inline ScenarioConfig parse_config_text(const std::string& text, const fs::path& base_dir,
                                        const std::string& origin = "<config>") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }

  ScenarioConfig cfg;
  for (const auto& [section_name, section_tree] : tree) {
    const detail::Section* section = nullptr;
    for (const auto& s : detail::schema()) {
      if (s.name == section_name) section = &s;
    }
    if (section == nullptr) {
      if (section_tree.empty() && !section_tree.data().empty()) {
        throw ConfigError(origin + ": key '" + section_name + "' outside any section");
      }
      throw ConfigError(origin + ": unknown section [" + section_name + "]");
    }
    for (const auto& [key, node] : section_tree) {
      const detail::Key* k = nullptr;
      for (const auto& cand : section->keys) {
        if (cand.name == key) k = &cand;
      }
      if (k == nullptr) throw ConfigError(origin + ": unknown key '" + key + "' in [" + section_name + "]");
      k->set(cfg, detail::strip_inline_comment(node.data()), "[" + section_name + "] " + key);
    }
  }
  finalize(cfg, base_dir);
  return cfg;
}

inline ScenarioConfig parse_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), fs::absolute(path).parent_path(), path.string());
}

/// Every key with its resolved value.
inline std::string echo_config(const ScenarioConfig& cfg) {
  std::string out;
  for (const auto& s : detail::schema()) {
    if (!out.empty()) out += '\n';
    out += '[' + s.name + "]\n";
    for (const auto& k : s.keys) out += k.name + " = " + k.get(cfg) + '\n';
  }
  return out;
}

/// Configurations of the three reference experiments.
inline ScenarioConfig builtin_scenario(const std::string& name, const fs::path& output_dir) {
  ScenarioConfig cfg;
  cfg.name = name;
  cfg.output_dir = output_dir;
  if (name == "fig3") {
    cfg.density_source = DensitySource::uniform;
  } else if (name == "fig4") {
    cfg.density_source = DensitySource::mfg;
  } else if (name == "fig5") {
    cfg.density_source = DensitySource::mfg;
    cfg.epidemic.beta_mode = seird::BetaMode::density;
  } else {
    throw ConfigError("unknown scenario '" + name + "' (expected fig3, fig4 or fig5)");
  }
  finalize(cfg, fs::current_path());
  return cfg;
}

}  // namespace mfg_seird::scenario
