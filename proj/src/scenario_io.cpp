#include "ffsm/scenario_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace ffsm {

namespace {

struct KeyValueFile {
  std::map<std::string, std::vector<double>> numeric;
  std::map<std::string, std::string> text;
  std::set<std::string> consumed;
  std::string origin;

  bool has(const std::string& key) const {
    return numeric.count(key) > 0 || text.count(key) > 0;
  }

  const std::vector<double>& values(const std::string& key, size_t n) {
    auto it = numeric.find(key);
    if (it == numeric.end())
      throw ConfigError(origin + ": missing numeric key '" + key + "'");
    if (it->second.size() != n)
      throw ConfigError(origin + ": key '" + key + "' expects " + std::to_string(n) +
                        " values, got " + std::to_string(it->second.size()));
    consumed.insert(key);
    return it->second;
  }

  double scalar(const std::string& key) { return values(key, 1)[0]; }

  double scalar_or(const std::string& key, double fallback) {
    return has(key) ? scalar(key) : fallback;
  }

  std::string word(const std::string& key) {
    auto it = text.find(key);
    if (it == text.end()) throw ConfigError(origin + ": missing key '" + key + "'");
    consumed.insert(key);
    return it->second;
  }

  std::string word_or(const std::string& key, const std::string& fallback) {
    return text.count(key) ? word(key) : fallback;
  }

  void reject_unconsumed() const {
    for (const auto& [key, _] : numeric)
      if (!consumed.count(key)) throw ConfigError(origin + ": unknown key '" + key + "'");
    for (const auto& [key, _] : text)
      if (!consumed.count(key)) throw ConfigError(origin + ": unknown key '" + key + "'");
  }
};

KeyValueFile tokenize(const std::string& content, const std::string& origin) {
  KeyValueFile kv;
  kv.origin = origin;
  std::istringstream stream(content);
  std::string line;
  int lineno = 0;
  while (std::getline(stream, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      // blank or comment-only line
      std::istringstream rest(line);
      std::string leftover;
      if (rest >> leftover)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
      continue;
    }
    std::istringstream key_stream(line.substr(0, eq));
    std::string key, extra;
    if (!(key_stream >> key) || (key_stream >> extra))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": bad key");
    std::istringstream value_stream(line.substr(eq + 1));
    std::vector<double> nums;
    std::vector<std::string> words;
    std::string tok;
    while (value_stream >> tok) {
      try {
        size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        nums.push_back(v);
      } catch (const std::exception&) {
        words.push_back(tok);
      }
    }
    if (!words.empty()) {
      if (words.size() != 1 || !nums.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": key '" + key + "' mixes words and numbers");
      kv.text[key] = words[0];
    } else if (!nums.empty()) {
      kv.numeric[key] = nums;
    } else {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": key '" + key +
                        "' has no value");
    }
  }
  return kv;
}

Vec2 vec2_of(const std::vector<double>& v) { return {v[0], v[1]}; }
Vec3 vec3_of(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  KeyValueFile kv = tokenize(text, origin);
  Scenario sc;

  for (int i = 0; i < kNumBodies; ++i) {
    const std::string p = "body" + std::to_string(i) + "_";
    sc.model.bodies[i].mass = kv.scalar(p + "mass_kg");
    sc.model.bodies[i].inertia_cm = kv.scalar(p + "inertia_kgm2");
    sc.model.bodies[i].l = kv.scalar(p + "l_m");
    sc.model.bodies[i].r = kv.scalar(p + "r_m");
  }

  sc.initial.theta_b = kv.scalar("theta_b0_rad");
  sc.initial.base_cm_pos = vec2_of(kv.values("base_cm_pos0_m", 2));
  sc.initial.phi = vec3_of(kv.values("phi0_rad", 3));
  sc.initial.omega_b = kv.scalar("omega_b0_rad_per_s");
  sc.initial.base_cm_vel = vec2_of(kv.values("base_cm_vel0_m_per_s", 2));
  sc.initial.phi_dot = vec3_of(kv.values("phi_dot0_rad_per_s", 3));

  sc.theta_bd = kv.scalar("theta_bd_rad");
  sc.trajectory.center = vec2_of(kv.values("traj_center_m", 2));
  sc.trajectory.radius = kv.scalar("traj_radius_m");
  sc.trajectory.rate = kv.scalar("traj_rate_rad_per_s");

  sc.gains.lambda_b = kv.scalar("lambda_b_per_s");
  {
    auto it_n = kv.numeric.find("Lambda_x_per_s");
    if (it_n == kv.numeric.end())
      throw ConfigError(origin + ": missing numeric key 'Lambda_x_per_s'");
    if (it_n->second.size() == 1) {
      sc.gains.Lambda_x = it_n->second[0] * Mat2::Identity();
    } else if (it_n->second.size() == 4) {
      sc.gains.Lambda_x << it_n->second[0], it_n->second[1], it_n->second[2],
          it_n->second[3];
    } else {
      throw ConfigError(origin + ": Lambda_x_per_s expects 1 or 4 values");
    }
    kv.consumed.insert("Lambda_x_per_s");
  }
  sc.gains.rank_tol = kv.scalar_or("rank_tol", 1e-8);

  {
    const auto& gd = kv.values("gamma_d_diag", 11);
    sc.Gamma_d.setZero();
    for (int i = 0; i < 11; ++i) sc.Gamma_d(i, i) = gd[static_cast<size_t>(i)];
    const auto& gk = kv.values("gamma_k_diag", 6);
    sc.Gamma_k.setZero();
    for (int i = 0; i < 6; ++i) sc.Gamma_k(i, i) = gk[static_cast<size_t>(i)];
  }
  {
    const auto& ad = kv.values("a_d_hat0", 11);
    for (int i = 0; i < 11; ++i) sc.a_d_hat0(i) = ad[static_cast<size_t>(i)];
    const auto& ak = kv.values("a_k_hat0", 6);
    for (int i = 0; i < 6; ++i) sc.a_k_hat0(i) = ak[static_cast<size_t>(i)];
  }

  sc.guard.h_min = kv.scalar_or("h_min_kgm2", 1.0);
  sc.guard.c_min = kv.scalar_or("c_min_kgm2", 1e-3);

  sc.dt = kv.scalar("dt_s");
  sc.duration = kv.scalar("duration_s");
  sc.mode = controller_mode_from_string(kv.word_or("mode", "full"));

  const std::string zk = kv.word_or("zeta_mode", "sine");
  if (zk == "sine") {
    sc.exploration.kind = ExplorationSpec::Kind::Sine;
  } else if (zk == "centering") {
    sc.exploration.kind = ExplorationSpec::Kind::JointCentering;
  } else {
    throw ConfigError(origin + ": zeta_mode must be 'sine' or 'centering'");
  }
  if (kv.has("zeta_amplitude_rad_per_s"))
    sc.exploration.amplitude = vec3_of(kv.values("zeta_amplitude_rad_per_s", 3));
  if (kv.has("zeta_frequency_hz"))
    sc.exploration.frequency_hz = vec3_of(kv.values("zeta_frequency_hz", 3));
  if (kv.has("zeta_phase_rad"))
    sc.exploration.phase = vec3_of(kv.values("zeta_phase_rad", 3));
  sc.exploration.centering_gain = kv.scalar_or("zeta_centering_gain_per_s", 1.0);
  if (kv.has("zeta_phi_ref_rad"))
    sc.exploration.phi_ref = vec3_of(kv.values("zeta_phi_ref_rad", 3));

  if (kv.has("check_p0_kgm2_per_s")) sc.check_p0 = kv.scalar("check_p0_kgm2_per_s");
  if (kv.has("check_v0_m_per_s")) sc.check_v0 = vec2_of(kv.values("check_v0_m_per_s", 2));
  sc.check_tol = kv.scalar_or("check_tol", 1e-3);

  kv.reject_unconsumed();
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path);
}

}  // namespace ffsm
