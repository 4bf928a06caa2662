#include "habdf/io/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "habdf/errors.hpp"
#include "habdf/io/csv.hpp"

namespace habdf::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Parse helpers rethrow InputError as ConfigError so config diagnostics stay
// in one exception type.
template <class F>
auto as_config(F&& f) {
  try {
    return f();
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
}

double real(const std::string& v, const std::string& where) {
  return as_config([&] { return parse_real(v, where); });
}

double nonneg(const std::string& v, const std::string& where) {
  const double x = real(v, where);
  if (!(x >= 0.0)) throw ConfigError(where + ": must be >= 0");
  return x;
}

double positive(const std::string& v, const std::string& where) {
  const double x = real(v, where);
  if (!(x > 0.0)) throw ConfigError(where + ": must be > 0");
  return x;
}

std::int64_t integer(const std::string& v, const std::string& where) {
  return as_config([&] { return parse_int(v, where); });
}

bool boolean(const std::string& v, const std::string& where) {
  return as_config([&] { return parse_bool(v, where); });
}

std::vector<double> real_list(const std::string& v, const std::string& where) {
  std::vector<double> out;
  std::string item;
  std::istringstream ss(v);
  while (std::getline(ss, item, ',')) out.push_back(positive(item, where));
  if (out.empty()) throw ConfigError(where + ": empty list");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& fixed_keys() {
  static const std::map<std::string, Setter> keys = {
      {"seed", [](RunConfig& c, const std::string& v, const std::string& w) {
         const auto s = integer(v, w);
         if (s < 0) throw ConfigError(w + ": must be >= 0");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"frames", [](RunConfig& c, const std::string& v, const std::string& w) {
         const auto f = integer(v, w);
         if (f < 1 || f > 100000000) throw ConfigError(w + ": must be in [1, 1e8]");
         c.frames = static_cast<int>(f);
       }},
      {"model.dt", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.params.model.dt = positive(v, w);
       }},
      {"model.accel_var", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.params.model.accel_var = nonneg(v, w);
       }},
      {"model.meas_var", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.params.meas_var = real_list(v, w);
         c.params.model.meas_var = c.params.meas_var.front();
       }},
      {"model.init_pos_var", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.params.init_pos_var = positive(v, w);
       }},
      {"model.init_vel_var", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.params.init_vel_var = positive(v, w);
       }},
      {"expert.xi", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.xi = positive(v, w);
       }},
      {"expert.dof", [](RunConfig& c, const std::string& v, const std::string& w) {
         const auto d = integer(v, w);
         if (d < 1) throw ConfigError(w + ": must be >= 1");
         c.dof = static_cast<int>(d);
       }},
      {"expert.confidence", [](RunConfig& c, const std::string& v, const std::string& w) {
         const double p = real(v, w);
         if (!(p > 0.0 && p < 1.0)) throw ConfigError(w + ": must lie in (0, 1)");
         c.confidence = p;
       }},
      {"expert.diag_approx", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.fusion.expert.use_diag_approx = boolean(v, w);
       }},
      {"vote.omega0", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.fusion.vote.omega0 = nonneg(v, w);
       }},
      {"vote.omega", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.fusion.vote.omega = nonneg(v, w);
       }},
      {"vote.lambda", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.fusion.vote.lambda = nonneg(v, w);
       }},
      {"vote.scale", [](RunConfig& c, const std::string& v, const std::string& w) {
         const auto s = real_list(v, w);
         c.fusion.vote.scale = Eigen::Map<const Vector>(s.data(), static_cast<Eigen::Index>(s.size()));
       }},
      {"fusion.gamma", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.fusion.gamma = real_list(v, w);
       }},
      {"fusion.delta", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.fusion.delta = real_list(v, w);
       }},
      {"fusion.cov_floor", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.fusion.cov_floor = positive(v, w);
       }},
      {"fusion.stale_after", [](RunConfig& c, const std::string& v, const std::string& w) {
         const auto s = integer(v, w);
         if (s < 1) throw ConfigError(w + ": must be >= 1");
         c.fusion.stale_after = static_cast<int>(s);
       }},
      {"plant.natural_freq", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.plant.natural_freq = positive(v, w);
       }},
      {"plant.damping", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.plant.damping = nonneg(v, w);
       }},
      {"plant.gain", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.plant.gain = real(v, w);
       }},
      {"plant.dt", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.plant.dt = positive(v, w);
       }},
      {"signal.amplitude", [](RunConfig& c, const std::string& v, const std::string& w) {
         c.signal.amplitude = real(v, w);
       }},
      {"signal.period", [](RunConfig& c, const std::string& v, const std::string& w) {
         const auto p = integer(v, w);
         if (p < 4) throw ConfigError(w + ": must be >= 4");
         c.signal.period = static_cast<int>(p);
       }},
      {"sensors", [](RunConfig& c, const std::string& v, const std::string& w) {
         const auto n = integer(v, w);
         if (n < 3 || n > 64) throw ConfigError(w + ": must be in [3, 64]");
         if (static_cast<std::size_t>(n) < c.sensors.size()) {
           throw ConfigError(w + ": fewer sensors than already configured");
         }
         c.sensors.resize(static_cast<std::size_t>(n));
       }},
      {"output.summary", [](RunConfig& c, const std::string& v, const std::string&) {
         c.output_summary = v;
       }},
  };
  return keys;
}

using SensorSetter = std::function<void(FaultProfile&, const std::string&, const std::string&)>;

const std::map<std::string, SensorSetter>& sensor_keys() {
  static const std::map<std::string, SensorSetter> keys = {
      {"noise_sigma", [](FaultProfile& p, const std::string& v, const std::string& w) {
         p.noise_sigma = nonneg(v, w);
       }},
      {"spike_prob", [](FaultProfile& p, const std::string& v, const std::string& w) {
         const double x = real(v, w);
         if (!(x >= 0.0 && x <= 1.0)) throw ConfigError(w + ": must lie in [0, 1]");
         p.spike_prob = x;
       }},
      {"spike_mag", [](FaultProfile& p, const std::string& v, const std::string& w) {
         p.spike_mag = real(v, w);
       }},
      {"drift_rate", [](FaultProfile& p, const std::string& v, const std::string& w) {
         p.drift_rate = real(v, w);
       }},
      {"shock_offset", [](FaultProfile& p, const std::string& v, const std::string& w) {
         p.shock_offset = real(v, w);
       }},
      {"shock_start", [](FaultProfile& p, const std::string& v, const std::string& w) {
         p.shock_start = integer(v, w);
       }},
      {"shock_end", [](FaultProfile& p, const std::string& v, const std::string& w) {
         p.shock_end = integer(v, w);
       }},
  };
  return keys;
}

constexpr std::size_t kMaxSensors = 64;

}  // namespace

void set_config_value(RunConfig& config, const std::string& key, const std::string& value,
                      const std::string& where) {
  const std::string w = where + ": " + key;
  if (auto it = fixed_keys().find(key); it != fixed_keys().end()) {
    it->second(config, value, w);
    return;
  }
  // sensor.<N>.<field>, N is 1-based
  if (key.rfind("sensor.", 0) == 0) {
    const auto dot = key.find('.', 7);
    if (dot != std::string::npos) {
      const std::string index = key.substr(7, dot - 7);
      const std::string field = key.substr(dot + 1);
      auto fit = sensor_keys().find(field);
      if (fit != sensor_keys().end()) {
        const auto n = integer(index, w + " (sensor index)");
        if (n < 1 || static_cast<std::size_t>(n) > kMaxSensors) {
          throw ConfigError(w + ": sensor index must be in [1, 64]");
        }
        const auto i = static_cast<std::size_t>(n - 1);
        if (config.sensors.size() <= i) config.sensors.resize(i + 1);
        fit->second(config.sensors[i], value, w);
        return;
      }
    }
  }
  throw ConfigError(where + ": unknown key '" + key + "'");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : fixed_keys()) out.push_back(k);
  for (const auto& [k, _] : sensor_keys()) out.push_back("sensor.N." + k);
  return out;
}

RunConfig parse_config(std::istream& in, const std::string& origin) {
  RunConfig config;
  std::string line;
  std::size_t n = 0;
  std::map<std::string, std::size_t> seen;
  std::map<std::string, std::string> values;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const std::string where = origin + ":" + std::to_string(n);
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": missing key");
    if (value.empty()) throw ConfigError(where + ": " + key + ": missing value");
    if (auto it = seen.find(key); it != seen.end()) {
      throw ConfigError(where + ": " + key + ": already set on line " + std::to_string(it->second));
    }
    seen[key] = n;
    values[key] = value;
    set_config_value(config, key, value, where);
  }

  for (std::size_t i = 0; i < config.sensors.size(); ++i) {
    if (config.sensors[i].shock_end < config.sensors[i].shock_start) {
      throw ConfigError(origin + ": sensor." + std::to_string(i + 1) +
                        ": shock_end precedes shock_start");
    }
  }
  if (auto it = values.find("sensors"); it != values.end()) {
    const auto declared = static_cast<std::size_t>(std::stoll(it->second));
    if (config.sensors.size() != declared) {
      throw ConfigError(origin + ":" + std::to_string(seen["sensors"]) + ": sensors: " +
                        std::to_string(declared) + " declared but sensor." +
                        std::to_string(config.sensors.size()) + " is configured");
    }
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  return parse_config(in, path.string());
}

FusionConfig resolved_fusion(const RunConfig& config, int axes) {
  FusionConfig f = config.fusion;
  if (config.xi) {
    f.expert.xi = *config.xi;
  } else {
    f.expert.xi = chi2_xi(config.dof > 0 ? config.dof : axes, config.confidence);
  }
  return f;
}

Scenario make_scenario(const RunConfig& config) {
  Scenario s;
  s.frames = config.frames;
  s.seed = config.seed;
  s.plant = config.plant;
  s.signal = config.signal;
  s.sensors = config.sensors;
  s.params = config.params;
  s.params.model.axes = 1;
  s.fusion = resolved_fusion(config, 1);
  return s;
}

}  // namespace habdf::io
