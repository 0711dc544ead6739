#pragma once

// Flat key-value run configuration ("key = value", '#' comments). A config
// with only n, omega, a and initial_index is valid; every other key has a
// documented default. Unknown keys are rejected so typos fail loudly.

#include <Eigen/Dense>
#include <cctype>
#include <charconv>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "spinsurf/basis.hpp"
#include "spinsurf/dynamics.hpp"
#include "spinsurf/errors.hpp"
#include "spinsurf/jumps.hpp"
#include "spinsurf/surfaces.hpp"
#include "spinsurf/system.hpp"
#include "spinsurf/version.hpp"

namespace spinsurf {

struct RunConfig {
  // system
  int n_spins = 3;
  double omega = 10.0;
  double uniform_coupling = 1.0;
  std::vector<std::tuple<int, int, double>> pair_couplings;  // overrides
  bool include_double_quantum = true;

  // initial state: basis index, or explicit amplitudes (mutually exclusive)
  int initial_index = 2;
  std::optional<std::vector<std::complex<double>>> initial_amplitudes;

  // integration
  IntegratorConfig integrator{1e-3, 1000.0, 10, 1e-6};
  double average_start = 0.0;

  // jumps
  double jump_rate = 0.01;
  int n_trajectories = 0;  // 0: skip the stochastic ensemble
  double class_tolerance = -1.0;
  std::uint64_t seed = 0;

  // separability
  double overlap_ceiling = 0.99;
  double degeneracy_tolerance = -1.0;
  double graph_threshold = 1e-12;

  // output
  bool write_trajectory = false;
  bool dump_hamiltonian = false;
  std::string command;  // optional; the --command flag takes precedence

  SpinSystem make_system() const {
    SpinSystem sys(n_spins, omega, uniform_coupling, include_double_quantum);
    for (const auto& [i, j, a] : pair_couplings) sys.set_coupling(i, j, a);
    return sys;
  }

  Eigen::VectorXcd make_initial_state() const {
    if (initial_amplitudes) {
      Eigen::VectorXcd v(static_cast<Eigen::Index>(initial_amplitudes->size()));
      for (std::size_t k = 0; k < initial_amplitudes->size(); ++k)
        v(static_cast<Eigen::Index>(k)) = (*initial_amplitudes)[k];
      return v;
    }
    return basis_vector(initial_index, n_spins);
  }

  SeparabilityConfig make_separability_config() const {
    return {degeneracy_tolerance, overlap_ceiling, graph_threshold};
  }

  JumpConfig make_jump_config() const {
    JumpConfig j;
    j.rate = jump_rate;
    j.seed = seed;
    j.n_trajectories = n_trajectories > 0 ? n_trajectories : 1;
    j.class_tolerance = class_tolerance;
    return j;
  }

  void validate() const;
  std::string resolved_text() const;  // '#'-prefixed header for output files

  static RunConfig parse(std::istream& in);
  static RunConfig parse_file(const std::string& path);
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double parse_double(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' has non-numeric value '" +
                      value + "'");
  }
}

inline long long parse_int(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' has non-integer value '" +
                      value + "'");
  }
}

inline std::uint64_t parse_uint64(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(value, &pos);
    if (pos != value.size() || value.front() == '-')
      throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' has invalid unsigned value '" +
                      value + "'");
  }
}

inline bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config: key '" + key + "' expects a boolean, got '" +
                    value + "'");
}

// "a_i_j" pair-coupling keys.
inline bool parse_pair_key(const std::string& key, int& i, int& j) {
  if (key.size() < 5 || key.compare(0, 2, "a_") != 0) return false;
  const std::size_t sep = key.find('_', 2);
  if (sep == std::string::npos || sep + 1 >= key.size()) return false;
  const std::string si = key.substr(2, sep - 2), sj = key.substr(sep + 1);
  auto all_digits = [](const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  };
  if (!all_digits(si) || !all_digits(sj)) return false;
  i = std::stoi(si);
  j = std::stoi(sj);
  return true;
}

}  // namespace detail

inline RunConfig RunConfig::parse(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  bool explicit_index = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value', got '" + line + "'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key or value");

    int pi = 0, pj = 0;
    if (key == "n") {
      cfg.n_spins = static_cast<int>(detail::parse_int(value, key));
    } else if (key == "omega") {
      cfg.omega = detail::parse_double(value, key);
    } else if (key == "a") {
      cfg.uniform_coupling = detail::parse_double(value, key);
    } else if (detail::parse_pair_key(key, pi, pj)) {
      cfg.pair_couplings.emplace_back(pi, pj, detail::parse_double(value, key));
    } else if (key == "include_p") {
      cfg.include_double_quantum = detail::parse_bool(value, key);
    } else if (key == "initial_index") {
      cfg.initial_index = static_cast<int>(detail::parse_int(value, key));
      explicit_index = true;
    } else if (key == "initial_amplitudes") {
      std::vector<std::complex<double>> amps;
      std::string token;
      std::istringstream tokens(value);
      std::vector<double> reals;
      while (tokens >> token) {
        if (!token.empty() && token.back() == ',') token.pop_back();
        if (token.empty()) continue;
        reals.push_back(detail::parse_double(token, key));
      }
      if (reals.size() % 2 != 0)
        throw ConfigError(
            "config: initial_amplitudes expects re/im pairs, got an odd count");
      for (std::size_t k = 0; k < reals.size(); k += 2)
        amps.emplace_back(reals[k], reals[k + 1]);
      cfg.initial_amplitudes = std::move(amps);
    } else if (key == "dt") {
      cfg.integrator.dt = detail::parse_double(value, key);
    } else if (key == "t_end") {
      cfg.integrator.t_end = detail::parse_double(value, key);
    } else if (key == "record_stride") {
      cfg.integrator.record_stride = static_cast<int>(detail::parse_int(value, key));
    } else if (key == "norm_abort_tol") {
      cfg.integrator.norm_abort_tol = detail::parse_double(value, key);
    } else if (key == "average_start") {
      cfg.average_start = detail::parse_double(value, key);
    } else if (key == "jump_rate") {
      cfg.jump_rate = detail::parse_double(value, key);
    } else if (key == "n_trajectories") {
      cfg.n_trajectories = static_cast<int>(detail::parse_int(value, key));
    } else if (key == "class_tolerance") {
      cfg.class_tolerance = detail::parse_double(value, key);
    } else if (key == "seed") {
      cfg.seed = detail::parse_uint64(value, key);
    } else if (key == "overlap_ceiling") {
      cfg.overlap_ceiling = detail::parse_double(value, key);
    } else if (key == "degeneracy_tolerance") {
      cfg.degeneracy_tolerance = detail::parse_double(value, key);
    } else if (key == "graph_threshold") {
      cfg.graph_threshold = detail::parse_double(value, key);
    } else if (key == "write_trajectory") {
      cfg.write_trajectory = detail::parse_bool(value, key);
    } else if (key == "dump_hamiltonian") {
      cfg.dump_hamiltonian = detail::parse_bool(value, key);
    } else if (key == "command") {
      cfg.command = value;
    } else {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
  }
  if (explicit_index && cfg.initial_amplitudes)
    throw ConfigError(
        "config: initial_index and initial_amplitudes are mutually exclusive");
  cfg.validate();
  return cfg;
}

inline RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  return parse(in);
}

inline void RunConfig::validate() const {
  if (n_spins < 2 || n_spins > max_spins)
    throw ConfigError("config: n must be in [2, " + std::to_string(max_spins) +
                      "], got " + std::to_string(n_spins));
  const int dim = basis_dim(n_spins);
  if (!initial_amplitudes && (initial_index < 1 || initial_index > dim))
    throw ConfigError("config: initial_index " + std::to_string(initial_index) +
                      " outside 1.." + std::to_string(dim));
  if (initial_amplitudes) {
    if (static_cast<int>(initial_amplitudes->size()) != dim)
      throw ConfigError("config: initial_amplitudes needs " +
                        std::to_string(dim) + " complex entries, got " +
                        std::to_string(initial_amplitudes->size()));
    double norm2 = 0.0;
    for (const auto& c : *initial_amplitudes) norm2 += std::norm(c);
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-9)
      throw ConfigError(
          "config: initial_amplitudes must be normalized within 1e-9");
  }
  for (const auto& [i, j, a] : pair_couplings) {
    (void)a;
    if (i < 1 || i > n_spins || j < 1 || j > n_spins || i == j)
      throw ConfigError("config: coupling key a_" + std::to_string(i) + "_" +
                        std::to_string(j) + " names an invalid spin pair");
  }
  try {
    integrator.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!(jump_rate >= 0.0)) throw ConfigError("config: jump_rate must be >= 0");
  if (n_trajectories < 0)
    throw ConfigError("config: n_trajectories must be >= 0");
  if (!(overlap_ceiling > 0.0 && overlap_ceiling <= 1.0))
    throw ConfigError("config: overlap_ceiling must be in (0, 1]");
  if (!(graph_threshold >= 0.0))
    throw ConfigError("config: graph_threshold must be >= 0");
  if (!command.empty() && command != "evolve" && command != "separability" &&
      command != "jumps" && command != "oracle")
    throw ConfigError("config: unknown command '" + command + "'");
}

// Full resolved configuration as '#' comment lines; prepended to every output
// file so results stay self-describing (and byte-reproducible: no timestamps).
inline std::string RunConfig::resolved_text() const {
  std::ostringstream os;
  char buf[64];
  auto g17 = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  os << "# " << project_name << " " << version << "\n";
  os << "# n = " << n_spins << "\n";
  os << "# omega = " << g17(omega) << "\n";
  os << "# a = " << g17(uniform_coupling) << "\n";
  for (const auto& [i, j, a] : pair_couplings)
    os << "# a_" << i << "_" << j << " = " << g17(a) << "\n";
  os << "# include_p = " << (include_double_quantum ? "true" : "false") << "\n";
  if (initial_amplitudes) {
    os << "# initial_amplitudes =";
    for (const auto& c : *initial_amplitudes)
      os << " " << g17(c.real()) << " " << g17(c.imag());
    os << "\n";
  } else {
    os << "# initial_index = " << initial_index << "\n";
  }
  os << "# dt = " << g17(integrator.dt) << "\n";
  os << "# t_end = " << g17(integrator.t_end) << "\n";
  os << "# record_stride = " << integrator.record_stride << "\n";
  os << "# norm_abort_tol = " << g17(integrator.norm_abort_tol) << "\n";
  os << "# average_start = " << g17(average_start) << "\n";
  os << "# jump_rate = " << g17(jump_rate) << "\n";
  os << "# n_trajectories = " << n_trajectories << "\n";
  os << "# class_tolerance = " << g17(class_tolerance) << "\n";
  os << "# seed = " << seed << "\n";
  os << "# overlap_ceiling = " << g17(overlap_ceiling) << "\n";
  os << "# degeneracy_tolerance = " << g17(degeneracy_tolerance) << "\n";
  os << "# graph_threshold = " << g17(graph_threshold) << "\n";
  os << "# write_trajectory = " << (write_trajectory ? "true" : "false") << "\n";
  os << "# dump_hamiltonian = " << (dump_hamiltonian ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace spinsurf
