// SPDX-License-Identifier: Apache-2.0
//
// milac-sim: analog matrix computing and beamforming simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

/**
 * @file experiment.hpp
 * @brief Config-driven experiment runner behind the `milac` command line tool.
 *
 * A config is a JSON object. Every experiment accepts "seed" and "out"; the
 * remaining fields depend on the experiment:
 *
 *   sumrate             n_t n_r snr_db trials strategies [tx_power y0]
 *   noisy-csi           as sumrate, plus csi_rho_db
 *   quantized           as sumrate, plus quant_bits [csi_rho_db]
 *   ber                 n_t n_r snr_db trials symbols_per_trial strategies [tx_power y0]
 *   complexity          n_grid [tau]
 *   perf-vs-complexity  n_grid snr_db trials strategies [tau tx_power y0]
 *   dft-check           n_grid
 *   network-dump        strategy n_t n_r snr_db [tx_power y0]
 *
 * Sum-rate strategy labels are "<path>:<precoder>" with path one of digital,
 * milac-arbit, milac-lmmse and precoder one of R-ZFBF, ZFBF, MBF, optionally
 * followed by "@csi<rho>dB" and/or "@B<bits>". BER labels are
 * "<digital|milac>:<MMSE|ZF|MF>". Unknown fields are rejected.
 *
 * Outputs written to the output directory: one or more CSV files, a
 * plot_<experiment>.py script and manifest.json.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "milac/beamforming.hpp"
#include "milac/complexity.hpp"
#include "milac/linksim.hpp"
#include "milac/network.hpp"

namespace milac::cli {

inline constexpr std::string_view kVersion = "0.1.0";

/// Invalid config; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Too many singular channel draws for the results to be trusted.
class NumericalTrouble : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment {
  SumRate,
  Ber,
  Complexity,
  PerfVsComplexity,
  NoisyCsi,
  Quantized,
  DftCheck,
  NetworkDump,
};

inline constexpr std::string_view kExperimentNames[] = {
    "sumrate", "ber", "complexity", "perf-vs-complexity",
    "noisy-csi", "quantized", "dft-check", "network-dump"};

inline std::string_view to_string(Experiment e) { return kExperimentNames[static_cast<int>(e)]; }

inline std::optional<Experiment> parse_experiment(std::string_view name) {
  for (int i = 0; i < 8; ++i)
    if (kExperimentNames[i] == name) return static_cast<Experiment>(i);
  return std::nullopt;
}

struct ExperimentConfig {
  Experiment experiment = Experiment::SumRate;
  LinkConfig link;
  std::vector<SumRateStrategy> sumrate;
  std::vector<BerStrategy> ber;
  std::vector<std::int64_t> n_grid;
  std::int64_t tau = 100;
  std::vector<double> csi_rho_db;
  std::vector<int> quant_bits;
  Strategy dump_strategy = Strategy::RZFBF;
  std::filesystem::path out_dir = "out";
  nlohmann::json source;  ///< config after overrides, used for the hash
};

// ------------------------------------------------------------ labels

inline SumRateStrategy parse_sumrate_label(const std::string& label) {
  const auto colon = label.find(':');
  if (colon == std::string::npos)
    throw ConfigError("strategy '" + label + "': expected <path>:<precoder>");
  SumRateStrategy s;
  const std::string path = label.substr(0, colon);
  if (path == "digital") s.path = PrecoderPath::Digital;
  else if (path == "milac-arbit") s.path = PrecoderPath::MilacArbitrary;
  else if (path == "milac-lmmse") s.path = PrecoderPath::MilacLmmse;
  else throw ConfigError("strategy '" + label + "': unknown path '" + path + "'");

  std::string rest = label.substr(colon + 1);
  std::vector<std::string> parts;
  for (std::size_t at; (at = rest.rfind('@')) != std::string::npos;) {
    parts.push_back(rest.substr(at + 1));
    rest.resize(at);
  }
  const auto st = parse_strategy(rest);
  if (!st || (*st != Strategy::RZFBF && *st != Strategy::ZFBF && *st != Strategy::MBF))
    throw ConfigError("strategy '" + label + "': precoder must be R-ZFBF, ZFBF or MBF");
  s.strategy = *st;
  for (const auto& p : parts) {
    try {
      if (p.starts_with("csi") && p.ends_with("dB") && p.size() > 5) {
        std::size_t used = 0;
        const std::string num = p.substr(3, p.size() - 5);
        s.csi_rho_db = std::stod(num, &used);
        if (used != num.size()) throw std::invalid_argument(p);
      } else if (p.starts_with("B") && p.size() > 1) {
        std::size_t used = 0;
        s.quant_bits = std::stoi(p.substr(1), &used);
        if (used != p.size() - 1) throw std::invalid_argument(p);
      } else {
        throw std::invalid_argument(p);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("strategy '" + label + "': bad modifier '@" + p + "'");
    }
  }
  if (s.quant_bits && (*s.quant_bits < 2 || *s.quant_bits % 2 != 0 || *s.quant_bits > 24))
    throw ConfigError("strategy '" + label + "': bits must be even and in [2, 24]");
  if (s.quant_bits && s.path == PrecoderPath::Digital)
    throw ConfigError("strategy '" + label + "': quantization applies to MiLAC paths only");
  return s;
}

inline BerStrategy parse_ber_label(const std::string& label) {
  const auto colon = label.find(':');
  if (colon == std::string::npos)
    throw ConfigError("strategy '" + label + "': expected <path>:<receiver>");
  BerStrategy s;
  const std::string path = label.substr(0, colon);
  if (path == "digital") s.path = CombinerPath::Digital;
  else if (path == "milac") s.path = CombinerPath::Milac;
  else throw ConfigError("strategy '" + label + "': unknown path '" + path + "'");
  const auto st = parse_strategy(label.substr(colon + 1));
  if (!st || (*st != Strategy::MMSE && *st != Strategy::ZF && *st != Strategy::MF))
    throw ConfigError("strategy '" + label + "': receiver must be MMSE, ZF or MF");
  s.strategy = *st;
  return s;
}

// ------------------------------------------------------------ parsing

namespace detail {

using nlohmann::json;

class FieldReader {
 public:
  explicit FieldReader(const json& j) : j_(j) {
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const char* key) {
    if (!has(key)) throw ConfigError(std::string("field '") + key + "': required");
    return j_.at(key);
  }

  std::int64_t integer(const char* key, std::int64_t min) {
    const json& v = raw(key);
    if (!v.is_number_integer())
      throw ConfigError(std::string("field '") + key + "': must be an integer");
    const auto x = v.get<std::int64_t>();
    if (x < min)
      throw ConfigError(std::string("field '") + key + "': must be >= " + std::to_string(min));
    return x;
  }

  std::int64_t integer_or(const char* key, std::int64_t min, std::int64_t fallback) {
    return has(key) ? integer(key, min) : fallback;
  }

  double positive_or(const char* key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number() || !(v.get<double>() > 0.0) || !std::isfinite(v.get<double>()))
      throw ConfigError(std::string("field '") + key + "': must be a positive number");
    return v.get<double>();
  }

  double number(const char* key) {
    const json& v = raw(key);
    if (!v.is_number() || !std::isfinite(v.get<double>()))
      throw ConfigError(std::string("field '") + key + "': must be a finite number");
    return v.get<double>();
  }

  std::vector<double> numbers(const char* key) {
    const json& v = raw(key);
    if (!v.is_array() || v.empty())
      throw ConfigError(std::string("field '") + key + "': must be a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>()))
        throw ConfigError(std::string("field '") + key + "': entries must be finite numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::int64_t> integers(const char* key, std::int64_t min) {
    const json& v = raw(key);
    if (!v.is_array() || v.empty())
      throw ConfigError(std::string("field '") + key + "': must be a non-empty array of integers");
    std::vector<std::int64_t> out;
    for (const auto& e : v) {
      if (!e.is_number_integer() || e.get<std::int64_t>() < min)
        throw ConfigError(std::string("field '") + key + "': entries must be integers >= " +
                          std::to_string(min));
      out.push_back(e.get<std::int64_t>());
    }
    return out;
  }

  std::vector<std::string> strings(const char* key) {
    const json& v = raw(key);
    if (!v.is_array() || v.empty())
      throw ConfigError(std::string("field '") + key + "': must be a non-empty array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string())
        throw ConfigError(std::string("field '") + key + "': entries must be strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  std::string string(const char* key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(std::string("field '") + key + "': must be a string");
    return v.get<std::string>();
  }

  void reject_unknown() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError("field '" + k + "': not used by this experiment");
  }

 private:
  const json& j_;
  std::set<std::string> seen_;
};

inline void read_link(FieldReader& r, LinkConfig& link, bool needs_trials) {
  link.n_t = static_cast<std::size_t>(r.integer("n_t", 1));
  link.n_r = static_cast<std::size_t>(r.integer("n_r", 1));
  link.snr_db = r.numbers("snr_db");
  if (needs_trials) link.trials = static_cast<std::size_t>(r.integer("trials", 1));
  link.tx_power = r.positive_or("tx_power", 1.0);
  link.y0 = r.positive_or("y0", kDefaultY0);
}

}  // namespace detail

/**
 * Builds and validates an ExperimentConfig. seed and out override the
 * corresponding config fields. Throws ConfigError on the first bad field.
 */
inline ExperimentConfig parse_config(Experiment experiment, const nlohmann::json& j,
                                     std::optional<std::uint64_t> seed = std::nullopt,
                                     std::optional<std::filesystem::path> out = std::nullopt) {
  detail::FieldReader r(j);
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  cfg.source = j;

  if (r.has("experiment")) {
    const std::string name = r.string("experiment");
    if (name != to_string(experiment))
      throw ConfigError("field 'experiment': config is for '" + name + "', not '" +
                        std::string(to_string(experiment)) + "'");
  }
  cfg.source["experiment"] = std::string(to_string(experiment));
  if (r.has("seed")) {
    const auto& v = j.at("seed");
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      throw ConfigError("field 'seed': must be a non-negative integer");
    cfg.link.seed = v.get<std::uint64_t>();
  }
  if (seed) cfg.link.seed = *seed;
  cfg.source["seed"] = cfg.link.seed;
  if (r.has("out")) cfg.out_dir = r.string("out");
  if (out) cfg.out_dir = *out;
  cfg.source.erase("out");  // where results go does not change them

  auto sumrate_strategies = [&] {
    for (const auto& label : r.strings("strategies"))
      cfg.sumrate.push_back(parse_sumrate_label(label));
  };

  switch (experiment) {
    case Experiment::SumRate:
      detail::read_link(r, cfg.link, true);
      sumrate_strategies();
      break;
    case Experiment::NoisyCsi:
      detail::read_link(r, cfg.link, true);
      sumrate_strategies();
      cfg.csi_rho_db = r.numbers("csi_rho_db");
      break;
    case Experiment::Quantized: {
      detail::read_link(r, cfg.link, true);
      sumrate_strategies();
      for (auto b : r.integers("quant_bits", 2)) {
        if (b % 2 != 0 || b > 24)
          throw ConfigError("field 'quant_bits': entries must be even and in [2, 24]");
        cfg.quant_bits.push_back(static_cast<int>(b));
      }
      if (r.has("csi_rho_db")) cfg.csi_rho_db = r.numbers("csi_rho_db");
      for (const auto& s : cfg.sumrate)
        if (s.path == PrecoderPath::Digital)
          throw ConfigError("field 'strategies': quantized runs need MiLAC paths");
      break;
    }
    case Experiment::Ber:
      detail::read_link(r, cfg.link, true);
      cfg.link.symbols_per_trial = static_cast<std::size_t>(r.integer("symbols_per_trial", 1));
      for (const auto& label : r.strings("strategies")) cfg.ber.push_back(parse_ber_label(label));
      if (cfg.link.n_r < cfg.link.n_t) throw ConfigError("field 'n_r': must be >= n_t for BER");
      break;
    case Experiment::Complexity:
      cfg.n_grid = r.integers("n_grid", 1);
      cfg.tau = r.integer_or("tau", 1, 100);
      break;
    case Experiment::PerfVsComplexity:
      cfg.n_grid = r.integers("n_grid", 1);
      cfg.tau = r.integer_or("tau", 1, 100);
      cfg.link.snr_db = r.numbers("snr_db");
      cfg.link.trials = static_cast<std::size_t>(r.integer("trials", 1));
      cfg.link.tx_power = r.positive_or("tx_power", 1.0);
      cfg.link.y0 = r.positive_or("y0", kDefaultY0);
      sumrate_strategies();
      for (auto n : cfg.n_grid)
        if (n > 512) throw ConfigError("field 'n_grid': Monte-Carlo sizes are capped at 512");
      break;
    case Experiment::DftCheck:
      cfg.n_grid = r.integers("n_grid", 1);
      for (auto n : cfg.n_grid)
        if (n > 1024 || (n & (n - 1)) != 0)
          throw ConfigError("field 'n_grid': entries must be powers of two <= 1024");
      break;
    case Experiment::NetworkDump: {
      cfg.link.n_t = static_cast<std::size_t>(r.integer("n_t", 1));
      cfg.link.n_r = static_cast<std::size_t>(r.integer("n_r", 1));
      cfg.link.snr_db = {r.number("snr_db")};
      cfg.link.tx_power = r.positive_or("tx_power", 1.0);
      cfg.link.y0 = r.positive_or("y0", kDefaultY0);
      const std::string name = r.string("strategy");
      const auto st = parse_strategy(name);
      if (!st || *st == Strategy::Arbitrary)
        throw ConfigError("field 'strategy': unknown beamformer '" + name + "'");
      cfg.dump_strategy = *st;
      break;
    }
  }
  r.reject_unknown();

  const bool tx_sum = experiment == Experiment::SumRate || experiment == Experiment::NoisyCsi ||
                      experiment == Experiment::Quantized;
  if (tx_sum && cfg.link.n_r > cfg.link.n_t)
    throw ConfigError("field 'n_r': multi-user precoding needs n_r <= n_t");
  if (std::filesystem::exists(cfg.out_dir) && !std::filesystem::is_directory(cfg.out_dir))
    throw ConfigError("field 'out': '" + cfg.out_dir.string() + "' is not a directory");
  return cfg;
}

inline ExperimentConfig load_config(Experiment experiment, const std::filesystem::path& path,
                                    std::optional<std::uint64_t> seed = std::nullopt,
                                    std::optional<std::filesystem::path> out = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  return parse_config(experiment, j, seed, std::move(out));
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(cfg.source.dump())));
  return buf;
}

// ------------------------------------------------------------ running

struct Artifact {
  std::string name;
  std::string contents;
};

struct RunResult {
  std::vector<Artifact> files;
  std::size_t redraws = 0;
  std::size_t trials = 0;
};

namespace detail {

inline void check_redraws(std::size_t redraws, std::size_t trials) {
  if (trials > 0 && redraws * 100 > trials)
    throw NumericalTrouble("numerical trouble: " + std::to_string(redraws) +
                           " singular channel redraws in " + std::to_string(trials) +
                           " trials (more than 1%)");
}

inline std::string plot_script(std::string_view title, std::string_view csv, std::string_view x,
                               std::string_view y, bool logy, std::string_view group) {
  std::ostringstream os;
  os << "#!/usr/bin/env python3\n"
     << "# Plots " << csv << ". Requires matplotlib.\n"
     << "import csv\nfrom collections import defaultdict\n\nimport matplotlib.pyplot as plt\n\n"
     << "curves = defaultdict(lambda: ([], []))\n"
     << "with open(\"" << csv << "\") as f:\n"
     << "    for row in csv.DictReader(f):\n"
     << "        xs, ys = curves[" << group << "]\n"
     << "        xs.append(float(row[\"" << x << "\"]))\n"
     << "        ys.append(float(row[\"" << y << "\"]))\n\n"
     << "for label, (xs, ys) in curves.items():\n"
     << "    plt.plot(xs, ys, marker=\"o\", label=label)\n"
     << (logy ? "plt.yscale(\"log\")\n" : "")
     << "plt.xlabel(\"" << x << "\")\nplt.ylabel(\"" << y << "\")\n"
     << "plt.title(\"" << title << "\")\nplt.grid(True, which=\"both\", alpha=0.3)\n"
     << "plt.legend()\nplt.savefig(\"" << title << ".png\", dpi=150, bbox_inches=\"tight\")\n";
  return os.str();
}

inline std::string csv_string(const CurveTable& t) {
  std::ostringstream os;
  write_curve_csv(os, t);
  return os.str();
}

inline std::vector<SumRateStrategy> expand(const ExperimentConfig& cfg) {
  std::vector<SumRateStrategy> out;
  for (const auto& base : cfg.sumrate) {
    out.push_back(base);
    for (double rho : cfg.csi_rho_db) {
      SumRateStrategy s = base;
      s.csi_rho_db = rho;
      out.push_back(s);
    }
    for (int b : cfg.quant_bits) {
      SumRateStrategy s = base;
      s.quant_bits = b;
      out.push_back(s);
    }
  }
  return out;
}

inline RunResult run_sumrate_family(const ExperimentConfig& cfg) {
  const CurveTable t = run_sumrate_experiment(cfg.link, expand(cfg));
  check_redraws(t.redraws, cfg.link.trials);
  const std::string name = std::string(to_string(cfg.experiment));
  const std::string csv = name + ".csv";
  return {{{csv, csv_string(t)},
           {"plot_" + name + ".py",
            plot_script(name, csv, "snr_db", "mean_metric", false, "row[\"strategy\"]")}},
          t.redraws,
          cfg.link.trials};
}

inline RunResult run_ber(const ExperimentConfig& cfg) {
  const CurveTable t = run_ber_experiment(cfg.link, cfg.ber);
  check_redraws(t.redraws, cfg.link.trials);
  std::ostringstream os;
  os << "strategy,n_t,n_r,snr_db,trials,mean_metric,stderr,bit_errors,bits\n";
  for (const auto& r : t.rows)
    os << r.strategy << ',' << r.n_t << ',' << r.n_r << ',' << format_number(r.snr_db) << ','
       << r.trials << ',' << format_number(r.mean) << ',' << format_number(r.stderr_) << ','
       << r.errors << ',' << r.bits << '\n';
  return {{{"ber.csv", os.str()},
           {"plot_ber.py",
            plot_script("ber", "ber.csv", "snr_db", "mean_metric", true, "row[\"strategy\"]")}},
          t.redraws,
          cfg.link.trials};
}

/// Columns: task,realization,n_t,n_r,tau,ops_exact,ops_sci,gain
inline std::string complexity_csv(const std::vector<std::int64_t>& grid, std::int64_t tau) {
  std::ostringstream os;
  os << "task,realization,n_t,n_r,tau,ops_exact,ops_sci,gain\n";
  for (Task task : {Task::ZeroForcing, Task::MatchedFiltering, Task::DFT}) {
    for (std::int64_t n : grid) {
      if (task == Task::DFT && (n & (n - 1)) != 0) continue;
      const Gain g = gain(task, n, tau);
      for (Realization r : {Realization::Digital, Realization::MiLAC}) {
        const ComplexityModel m{task, r, n, n, std::nullopt, std::nullopt, tau};
        const Rational ops = ops_per_block(m);
        os << to_string(task) << ',' << to_string(r) << ',' << n << ',' << n << ',' << tau << ','
           << ops.str() << ',' << to_sci(ops.to_double(), 4) << ','
           << (r == Realization::Digital ? to_sci(g.value.to_double(), 4) : "1") << '\n';
      }
    }
  }
  return os.str();
}

inline RunResult run_complexity(const ExperimentConfig& cfg) {
  return {{{"complexity.csv", complexity_csv(cfg.n_grid, cfg.tau)},
           {"plot_complexity.py",
            plot_script("complexity", "complexity.csv", "n_r", "ops_sci", true,
                        "row[\"task\"] + \" \" + row[\"realization\"]")}},
          0,
          0};
}

inline RunResult run_perf_vs_complexity(const ExperimentConfig& cfg) {
  CurveTable all;
  std::ostringstream ops;
  ops << "realization,n_t,n_r,design_ops_exact,design_ops_sci\n";
  for (std::int64_t n : cfg.n_grid) {
    LinkConfig link = cfg.link;
    link.n_t = link.n_r = static_cast<std::size_t>(n);
    const CurveTable t = run_sumrate_experiment(link, cfg.sumrate);
    check_redraws(t.redraws, link.trials);
    all.redraws += t.redraws;
    all.rows.insert(all.rows.end(), t.rows.begin(), t.rows.end());
    for (Realization r : {Realization::Digital, Realization::MiLAC}) {
      const Rational v = zf_design_ops(r, n, n);
      ops << to_string(r) << ',' << n << ',' << n << ',' << v.str() << ','
          << to_sci(v.to_double(), 4) << '\n';
    }
  }
  std::ostringstream script;
  script << plot_script("perf-vs-complexity", "perf_vs_complexity.csv", "n_r", "mean_metric",
                        false, "row[\"strategy\"] + \" @ \" + row[\"snr_db\"] + \" dB\"");
  return {{{"perf_vs_complexity.csv", csv_string(all)},
           {"design_ops.csv", ops.str()},
           {"plot_perf-vs-complexity.py", script.str()}},
          all.redraws,
          cfg.link.trials * cfg.n_grid.size()};
}

inline RunResult run_dft_check(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "n,max_error,parseval_error\n";
  for (std::int64_t n64 : cfg.n_grid) {
    const auto n = static_cast<std::size_t>(n64);
    RngStream rng(cfg.link.seed, n);
    std::vector<Complex> x(n);
    ComplexMatrix u(n, 1);
    for (std::size_t i = 0; i < n; ++i) u(i, 0) = x[i] = rng.complex_gaussian();
    const ComplexMatrix v2 = simulate_nodal(dft_network(n, cfg.link.y0), u).v2;
    const std::vector<Complex> ref = fft_unitary(x);
    double err = 0.0, ex = 0.0, ey = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err = std::max(err, std::abs(v2(i, 0) - ref[i]));
      ex += std::norm(x[i]);
      ey += std::norm(v2(i, 0));
    }
    os << n << ',' << format_number(err) << ',' << format_number(std::abs(ey - ex) / ex) << '\n';
  }
  return {{{"dft_check.csv", os.str()},
           {"plot_dft-check.py",
            plot_script("dft-check", "dft_check.csv", "n", "max_error", true, "\"max_error\"")}},
          0,
          0};
}

inline RunResult run_network_dump(const ExperimentConfig& cfg) {
  const LinkConfig& link = cfg.link;
  const Strategy s = cfg.dump_strategy;
  const MilacNetwork net = [&] {
    if (s == Strategy::DFT) return dft_network(link.n_r, link.y0);
    RngStream rng(link.seed, 0);
    const ComplexMatrix h = rayleigh_channel(link.n_r, link.n_t, rng);
    const double sigma2 = link.noise_power(link.snr_db.front());
    const bool tx = is_transmitter_strategy(s);
    const double lambda = optimal_lambda(tx ? link.n_r : link.n_t, sigma2, link.tx_power);
    const BeamformerSpec spec{s, tx ? Side::Transmitter : Side::Receiver, lambda,
                              tx ? Normalization::FrobeniusGlobal : Normalization::None,
                              std::nullopt};
    return lmmse_inspired_network(spec, h, link.y0);
  }();
  std::ostringstream os;
  write_network(os, net);
  return {{{"network.milac", os.str()}}, 0, 0};
}

}  // namespace detail

/// Runs the experiment and returns the artifacts; nothing touches the disk.
inline RunResult run(const ExperimentConfig& cfg) {
  RunResult result;
  switch (cfg.experiment) {
    case Experiment::SumRate:
    case Experiment::NoisyCsi:
    case Experiment::Quantized: result = detail::run_sumrate_family(cfg); break;
    case Experiment::Ber: result = detail::run_ber(cfg); break;
    case Experiment::Complexity: result = detail::run_complexity(cfg); break;
    case Experiment::PerfVsComplexity: result = detail::run_perf_vs_complexity(cfg); break;
    case Experiment::DftCheck: result = detail::run_dft_check(cfg); break;
    case Experiment::NetworkDump: result = detail::run_network_dump(cfg); break;
  }
  nlohmann::json manifest;
  manifest["experiment"] = std::string(to_string(cfg.experiment));
  manifest["config_hash"] = config_hash(cfg);
  manifest["config"] = cfg.source;
  manifest["seed"] = cfg.link.seed;
  manifest["version"] = std::string(kVersion);
  manifest["redraws"] = result.redraws;
  std::vector<std::string> names;
  for (const auto& f : result.files) names.push_back(f.name);
  manifest["outputs"] = names;
  result.files.push_back({"manifest.json", manifest.dump(2) + "\n"});
  return result;
}

/// Writes artifacts into dir, creating it if needed.
inline void write_artifacts(const std::filesystem::path& dir, const RunResult& result) {
  std::filesystem::create_directories(dir);
  for (const auto& f : result.files) {
    std::ofstream out(dir / f.name, std::ios::binary);
    out << f.contents;
    if (!out) throw std::runtime_error("cannot write " + (dir / f.name).string());
  }
}

}  // namespace milac::cli
