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
 * @file linksim.hpp
 * @brief Monte-Carlo link simulation: Rayleigh channels, QPSK, sum rate and
 * BER measurement, noisy CSI and Lloyd-Max quantized networks.
 *
 * Randomness: every trial owns an RngStream keyed by (seed, trial index), so
 * results do not depend on how trials are scheduled across threads.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "milac/beamforming.hpp"
#include "milac/network.hpp"
#include "milac/numerics.hpp"

namespace milac {

// ---------------------------------------------------------------- random

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/**
 * Seedable stream: std::mt19937_64 keyed by SplitMix64(seed, stream).
 * Gaussian draws use std::normal_distribution.
 */
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

  double gaussian() { return normal_(engine_); }
  std::uint64_t next_u64() { return engine_(); }
  std::uint8_t bit() { return static_cast<std::uint8_t>(engine_() >> 63); }

  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  Complex complex_gaussian(double variance = 1.0) {
    const double s = std::sqrt(variance / 2.0);
    const double re = gaussian();
    const double im = gaussian();
    return {s * re, s * im};
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// i.i.d. CN(0,1) entries: unit path gain Rayleigh fading.
inline ComplexMatrix rayleigh_channel(std::size_t n_r, std::size_t n_t, RngStream& rng) {
  ComplexMatrix h(n_r, n_t);
  for (auto& z : h.data()) z = rng.complex_gaussian(1.0);
  return h;
}

/// h + e with e ~ CN(0, 10^(-rho/10)); an infinite rho returns h unchanged.
inline ComplexMatrix noisy_csi(const ComplexMatrix& h, double rho_db, RngStream& rng) {
  if (std::isinf(rho_db) && rho_db > 0) return h;
  const double var = std::pow(10.0, -rho_db / 10.0);
  ComplexMatrix out = h;
  for (auto& z : out.data()) z += rng.complex_gaussian(var);
  return out;
}

// ----------------------------------------------------------------- QPSK

/**
 * Gray-mapped QPSK at unit energy. The first bit of a pair picks the sign
 * of the real part, the second the sign of the imaginary part (0 -> +):
 * 00 -> (1+j)/sqrt2, 01 -> (1-j)/sqrt2, 11 -> (-1-j)/sqrt2, 10 -> (-1+j)/sqrt2.
 */
inline std::vector<Complex> qpsk_map(std::span<const std::uint8_t> bits) {
  if (bits.size() % 2 != 0) throw std::invalid_argument("qpsk_map: odd number of bits");
  const double a = 1.0 / std::numbers::sqrt2;
  std::vector<Complex> out(bits.size() / 2);
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = {bits[2 * k] ? -a : a, bits[2 * k + 1] ? -a : a};
  return out;
}

/// Per-dimension sign decision; exact zeros decide bit 0.
inline std::vector<std::uint8_t> qpsk_demap(std::span<const Complex> symbols) {
  std::vector<std::uint8_t> bits(2 * symbols.size());
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    bits[2 * k] = symbols[k].real() < 0.0;
    bits[2 * k + 1] = symbols[k].imag() < 0.0;
  }
  return bits;
}

// ------------------------------------------------------------- sum rate

/**
 * Multi-user MISO sum rate with uniform per-user power p_t / N_R and
 * interference treated as noise:
 *   SINR_k = (p/N_R)|h_k w_k|^2 / ((p/N_R) sum_{j!=k} |h_k w_j|^2 + sigma2)
 */
inline double sum_rate(const ComplexMatrix& h, const ComplexMatrix& w, double p_t, double sigma2) {
  if (w.rows() != h.cols() || w.cols() != h.rows())
    throw ShapeError("sum_rate: W must be N_T x N_R");
  const ComplexMatrix g = h * w;
  const double p = p_t / static_cast<double>(h.rows());
  double rate = 0.0;
  for (std::size_t k = 0; k < g.rows(); ++k) {
    double total = 0.0;
    for (std::size_t j = 0; j < g.cols(); ++j) total += std::norm(g(k, j));
    const double signal = std::norm(g(k, k));
    rate += std::log2(1.0 + p * signal / (p * (total - signal) + sigma2));
  }
  return rate;
}

// ------------------------------------------------------------ quantizer

namespace detail {
inline double std_normal_pdf(double x) {
  return std::isinf(x) ? 0.0 : std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}
inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
}  // namespace detail

/// Scalar quantizer for a unit-variance real Gaussian.
struct QuantizerCodebook {
  int bits_per_real_dim = 1;
  std::vector<double> levels;      ///< strictly increasing, size 2^bits
  std::vector<double> thresholds;  ///< size 2^bits - 1, midpoints between levels

  double quantize(double x) const {
    const auto it = std::upper_bound(thresholds.begin(), thresholds.end(), x);
    return levels[static_cast<std::size_t>(it - thresholds.begin())];
  }

  /// E[(X - Q(X))^2] for X ~ N(0,1), evaluated in closed form per cell.
  double distortion() const {
    double d = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const double a = i == 0 ? -std::numeric_limits<double>::infinity() : thresholds[i - 1];
      const double b =
          i + 1 == levels.size() ? std::numeric_limits<double>::infinity() : thresholds[i];
      const double pa = detail::std_normal_pdf(a), pb = detail::std_normal_pdf(b);
      const double mass = detail::std_normal_cdf(b) - detail::std_normal_cdf(a);
      const double first = pa - pb;  // integral of x phi(x)
      const double apa = std::isinf(a) ? 0.0 : a * pa;
      const double bpb = std::isinf(b) ? 0.0 : b * pb;
      const double second = mass + apa - bpb;  // integral of x^2 phi(x)
      const double l = levels[i];
      d += second - 2.0 * l * first + l * l * mass;
    }
    return d;
  }

  double sqnr_db() const { return 10.0 * std::log10(1.0 / distortion()); }
};

/**
 * Lloyd-Max quantizer for N(0,1): alternate midpoint thresholds and
 * conditional-mean levels until no level moves by more than 1e-12.
 */
inline QuantizerCodebook lloyd_max_codebook(int bits_per_real_dim) {
  if (bits_per_real_dim < 1 || bits_per_real_dim > 12)
    throw std::invalid_argument("lloyd_max_codebook: bits must be in [1, 12]");
  const std::size_t n = std::size_t{1} << bits_per_real_dim;
  QuantizerCodebook cb;
  cb.bits_per_real_dim = bits_per_real_dim;
  cb.levels.resize(n);
  cb.thresholds.resize(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    cb.levels[i] = (static_cast<double>(i) - 0.5 * static_cast<double>(n - 1)) * 4.0 /
                   static_cast<double>(n);
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 10'000'000; ++iter) {
    for (std::size_t i = 0; i + 1 < n; ++i)
      cb.thresholds[i] = 0.5 * (cb.levels[i] + cb.levels[i + 1]);
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = i == 0 ? -inf : cb.thresholds[i - 1];
      const double b = i + 1 == n ? inf : cb.thresholds[i];
      const double mass = detail::std_normal_cdf(b) - detail::std_normal_cdf(a);
      const double centroid = (detail::std_normal_pdf(a) - detail::std_normal_pdf(b)) / mass;
      moved = std::max(moved, std::abs(centroid - cb.levels[i]));
      cb.levels[i] = centroid;
    }
    if (moved < 1e-12) break;
  }
  for (std::size_t i = 0; i + 1 < n; ++i)
    cb.thresholds[i] = 0.5 * (cb.levels[i] + cb.levels[i + 1]);
  return cb;
}

/**
 * Quantizes the off-diagonal components of a network. Each real dimension
 * is mapped through the codebook scaled by the RMS per real dimension of
 * the off-diagonal components in the same P block (so blocks with different
 * scales, e.g. after Frobenius normalization, are treated separately; an
 * all-zero block stays zero). Ground components Y(k,k) are not restricted to
 * the codebook: they are re-solved so the diagonal of P is unchanged.
 */
inline MilacNetwork quantize_network(const MilacNetwork& net,
                                     const std::optional<QuantizerCodebook>& codebook) {
  if (!codebook) return net;
  const std::size_t n = net.n_in(), p = net.ports();
  const ComplexMatrix& c = net.components();
  auto block_of = [n](std::size_t i) { return i < n ? 0u : 1u; };

  double energy[2][2] = {{0, 0}, {0, 0}};
  std::size_t count[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = 0; k < p; ++k) {
      if (i == k) continue;
      energy[block_of(i)][block_of(k)] += std::norm(c(i, k));
      ++count[block_of(i)][block_of(k)];
    }

  ComplexMatrix q = c;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = 0; k < p; ++k) {
      if (i == k) continue;
      const auto bi = block_of(i), bk = block_of(k);
      const double sigma = std::sqrt(energy[bi][bk] / (2.0 * static_cast<double>(count[bi][bk])));
      if (sigma == 0.0) continue;
      q(i, k) = {sigma * codebook->quantize(c(i, k).real() / sigma),
                 sigma * codebook->quantize(c(i, k).imag() / sigma)};
    }
  for (std::size_t k = 0; k < p; ++k) {
    Complex shift{};
    for (std::size_t i = 0; i < p; ++i)
      if (i != k) shift += c(i, k) - q(i, k);
    q(k, k) = c(k, k) + shift;
  }
  return MilacNetwork(net.n_in(), net.m_out(), net.y0(), std::move(q));
}

// ------------------------------------------------------------ parallel

/// Worker count: MILAC_THREADS if set (>= 1), else hardware concurrency.
inline unsigned worker_threads() {
  if (const char* env = std::getenv("MILAC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on up to worker_threads() threads.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(worker_threads(), std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  pool.clear();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------- experiments

struct LinkConfig {
  std::size_t n_t = 4;
  std::size_t n_r = 4;
  std::vector<double> snr_db;
  std::size_t trials = 1;
  std::size_t symbols_per_trial = 1;
  std::uint64_t seed = 1;
  double tx_power = 1.0;
  double y0 = kDefaultY0;

  void validate() const {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (n_t < 1 || n_r < 1) throw std::invalid_argument("antenna counts must be >= 1");
    if (snr_db.empty()) throw std::invalid_argument("snr_db must not be empty");
    if (!(tx_power > 0.0)) throw std::invalid_argument("tx_power must be positive");
    if (!(y0 > 0.0)) throw std::invalid_argument("y0 must be positive");
  }

  double noise_power(double snr) const { return tx_power * std::pow(10.0, -snr / 10.0); }
};

/// How a precoder reaches the antennas.
enum class PrecoderPath {
  Digital,         ///< digital W, per-column normalized
  MilacArbitrary,  ///< digital W synthesized into a feed-forward network
  MilacLmmse,      ///< network computes F from H, Frobenius normalized
};

inline std::string_view to_string(PrecoderPath p) {
  switch (p) {
    case PrecoderPath::Digital: return "digital";
    case PrecoderPath::MilacArbitrary: return "milac-arbit";
    case PrecoderPath::MilacLmmse: return "milac-lmmse";
  }
  return "?";
}

struct SumRateStrategy {
  PrecoderPath path = PrecoderPath::Digital;
  Strategy strategy = Strategy::RZFBF;
  std::optional<double> csi_rho_db;  ///< design from noisy CSI at this SNR
  std::optional<int> quant_bits;     ///< B bits per complex component (MiLAC only)

  std::string label() const {
    std::string s = std::string(to_string(path)) + ":" + std::string(to_string(strategy));
    if (csi_rho_db) {
      char buf[32];
      auto r = std::to_chars(buf, buf + sizeof(buf), *csi_rho_db);
      s += "@csi" + std::string(buf, r.ptr) + "dB";
    }
    if (quant_bits) s += "@B" + std::to_string(*quant_bits);
    return s;
  }
};

/// One (strategy, SNR) point of a curve plus the per-trial samples behind it.
struct CurveRow {
  std::string strategy;
  std::size_t n_t = 0, n_r = 0;
  double snr_db = 0.0;
  std::size_t trials = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::vector<double> samples;
  std::uint64_t errors = 0;  ///< BER only
  std::uint64_t bits = 0;    ///< BER only
};

struct CurveTable {
  std::vector<CurveRow> rows;
  std::size_t redraws = 0;  ///< trials redrawn after a singular channel

  const CurveRow& find(const std::string& strategy, double snr) const {
    for (const auto& r : rows)
      if (r.strategy == strategy && r.snr_db == snr) return r;
    throw std::out_of_range("CurveTable: no row for " + strategy);
  }
};

/// Effective N_T x N_R precoder realized by the chosen path for one SNR.
inline ComplexMatrix realize_precoder(const SumRateStrategy& s, const ComplexMatrix& h_design,
                                      double lambda, double y0,
                                      const std::optional<QuantizerCodebook>& codebook) {
  switch (s.path) {
    case PrecoderPath::Digital:
      return precoder_digital(s.strategy, h_design, lambda, Normalization::PerColumn);
    case PrecoderPath::MilacArbitrary: {
      const ComplexMatrix w = precoder_digital(s.strategy, h_design, lambda, Normalization::PerColumn);
      return transfer_matrix(quantize_network(arbitrary_tx_network(w, y0), codebook));
    }
    case PrecoderPath::MilacLmmse: {
      const BeamformerSpec spec{s.strategy, Side::Transmitter, lambda,
                                Normalization::FrobeniusGlobal, std::nullopt};
      return transfer_matrix(quantize_network(lmmse_inspired_network(spec, h_design, y0), codebook));
    }
  }
  throw std::logic_error("realize_precoder: unknown path");
}

namespace detail {

inline void finish_row(CurveRow& row) {
  const double n = static_cast<double>(row.samples.size());
  double sum = 0.0;
  for (double v : row.samples) sum += v;
  row.mean = sum / n;
  double ss = 0.0;
  for (double v : row.samples) ss += (v - row.mean) * (v - row.mean);
  row.stderr_ = row.samples.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
}

inline constexpr std::size_t kMaxRedrawsPerTrial = 64;

}  // namespace detail

/**
 * Mean sum rate per (strategy, SNR) over i.i.d. Rayleigh channels. Every
 * strategy and SNR sees the same channel (and the same CSI error draw) in a
 * given trial, so curves can be compared trial by trial.
 */
inline CurveTable run_sumrate_experiment(const LinkConfig& cfg,
                                         const std::vector<SumRateStrategy>& strategies) {
  cfg.validate();
  if (cfg.n_r > cfg.n_t) throw std::invalid_argument("multi-user precoding needs n_r <= n_t");
  for (const auto& s : strategies) {
    if (!is_transmitter_strategy(s.strategy) || s.strategy == Strategy::Arbitrary)
      throw std::invalid_argument("sum-rate strategy must be R-ZFBF, ZFBF or MBF");
    if (s.quant_bits && (*s.quant_bits < 2 || *s.quant_bits % 2 != 0))
      throw std::invalid_argument("quant_bits must be an even number >= 2");
    if (s.quant_bits && s.path == PrecoderPath::Digital)
      throw std::invalid_argument("quantized admittances only apply to MiLAC paths");
  }
  std::vector<std::optional<QuantizerCodebook>> codebooks;
  for (const auto& s : strategies)
    codebooks.push_back(s.quant_bits ? std::optional(lloyd_max_codebook(*s.quant_bits / 2))
                                     : std::nullopt);

  const std::size_t ns = strategies.size(), nsnr = cfg.snr_db.size();
  // results[trial][snr * ns + strategy]
  std::vector<std::vector<double>> results(cfg.trials, std::vector<double>(ns * nsnr));
  std::vector<std::size_t> redraws(cfg.trials, 0);

  parallel_for(cfg.trials, [&](std::size_t t) {
    RngStream rng(cfg.seed, t);
    for (std::size_t attempt = 0;; ++attempt) {
      const ComplexMatrix h = rayleigh_channel(cfg.n_r, cfg.n_t, rng);
      const ComplexMatrix csi_error = rayleigh_channel(cfg.n_r, cfg.n_t, rng);
      try {
        for (std::size_t si = 0; si < nsnr; ++si) {
          const double sigma2 = cfg.noise_power(cfg.snr_db[si]);
          const double lambda = optimal_lambda(cfg.n_r, sigma2, cfg.tx_power);
          for (std::size_t k = 0; k < ns; ++k) {
            const auto& s = strategies[k];
            ComplexMatrix h_design = h;
            if (s.csi_rho_db)
              h_design = h + csi_error * Complex(std::pow(10.0, -*s.csi_rho_db / 20.0));
            const ComplexMatrix w = realize_precoder(s, h_design, lambda, cfg.y0, codebooks[k]);
            results[t][si * ns + k] = sum_rate(h, w, cfg.tx_power, sigma2);
          }
        }
        return;
      } catch (const SingularMatrixError&) {
        if (attempt + 1 >= detail::kMaxRedrawsPerTrial) throw;
        ++redraws[t];
      }
    }
  });

  CurveTable table;
  for (std::size_t k = 0; k < ns; ++k)
    for (std::size_t si = 0; si < nsnr; ++si) {
      CurveRow row;
      row.strategy = strategies[k].label();
      row.n_t = cfg.n_t;
      row.n_r = cfg.n_r;
      row.snr_db = cfg.snr_db[si];
      row.trials = cfg.trials;
      row.samples.reserve(cfg.trials);
      for (std::size_t t = 0; t < cfg.trials; ++t) row.samples.push_back(results[t][si * ns + k]);
      detail::finish_row(row);
      table.rows.push_back(std::move(row));
    }
  for (auto r : redraws) table.redraws += r;
  return table;
}

enum class CombinerPath { Digital, Milac };

inline std::string_view to_string(CombinerPath p) {
  return p == CombinerPath::Digital ? "digital" : "milac";
}

struct BerStrategy {
  CombinerPath path = CombinerPath::Digital;
  Strategy strategy = Strategy::ZF;

  std::string label() const {
    return std::string(to_string(path)) + ":" + std::string(to_string(strategy));
  }
};

/**
 * Combines the received block Y (N_R x S) with the selected receiver.
 * MMSE and MF use lambda = N_T sigma^2 / P_T; with sigma^2 = 0 MMSE reduces
 * to ZF, and MF (a pure scaling of H^H) uses lambda = 1.
 */
inline ComplexMatrix combine(const BerStrategy& s, const ComplexMatrix& h, const ComplexMatrix& y,
                             double sigma2, double tx_power, double y0) {
  Strategy strategy = s.strategy;
  double lambda = optimal_lambda(h.cols(), sigma2, tx_power);
  if (!(lambda > 0.0)) {
    if (strategy == Strategy::MMSE) strategy = Strategy::ZF;
    lambda = 1.0;
  }
  if (s.path == CombinerPath::Digital) return combiner_digital(strategy, h, lambda) * y;
  const BeamformerSpec spec{strategy, Side::Receiver, lambda, Normalization::None, std::nullopt};
  return simulate_nodal(lmmse_inspired_network(spec, h, y0), y).v2;
}

struct BitCount {
  std::uint64_t errors = 0;
  std::uint64_t bits = 0;
};

/// Draws bits and noise for S symbol vectors, detects with every strategy.
inline std::vector<BitCount> ber_block(const std::vector<BerStrategy>& strategies,
                                       const ComplexMatrix& h, double sigma2, double tx_power,
                                       std::size_t symbols, double y0, RngStream& rng) {
  const std::size_t nt = h.cols();
  std::vector<std::uint8_t> bits(2 * nt * symbols);
  for (auto& b : bits) b = rng.bit();
  const std::vector<Complex> sym = qpsk_map(bits);
  // x(i, s) = sqrt(P_T / N_T) * sym[s * nt + i]
  const double amp = std::sqrt(tx_power / static_cast<double>(nt));
  ComplexMatrix x(nt, symbols);
  for (std::size_t s = 0; s < symbols; ++s)
    for (std::size_t i = 0; i < nt; ++i) x(i, s) = amp * sym[s * nt + i];
  ComplexMatrix y = h * x;
  if (sigma2 > 0.0)
    for (auto& z : y.data()) z += rng.complex_gaussian(sigma2);

  std::vector<BitCount> out;
  out.reserve(strategies.size());
  for (const auto& st : strategies) {
    const ComplexMatrix z = combine(st, h, y, sigma2, tx_power, y0);
    std::vector<Complex> flat(nt * symbols);
    for (std::size_t s = 0; s < symbols; ++s)
      for (std::size_t i = 0; i < nt; ++i) flat[s * nt + i] = z(i, s);
    const auto decided = qpsk_demap(flat);
    BitCount bc;
    bc.bits = bits.size();
    for (std::size_t b = 0; b < bits.size(); ++b) bc.errors += decided[b] != bits[b];
    out.push_back(bc);
  }
  return out;
}

/**
 * QPSK BER of a single-user N_T x N_R link. All strategies share the channel,
 * bits and noise of each (trial, SNR), so Digital and MiLAC receivers can be
 * compared decision by decision.
 */
inline CurveTable run_ber_experiment(const LinkConfig& cfg, const std::vector<BerStrategy>& strategies) {
  cfg.validate();
  if (cfg.n_r < cfg.n_t) throw std::invalid_argument("single-user combining needs n_r >= n_t");
  if (cfg.symbols_per_trial < 1) throw std::invalid_argument("symbols_per_trial must be >= 1");
  for (const auto& s : strategies)
    if (s.strategy != Strategy::MMSE && s.strategy != Strategy::ZF && s.strategy != Strategy::MF)
      throw std::invalid_argument("BER strategy must be MMSE, ZF or MF");

  const std::size_t ns = strategies.size(), nsnr = cfg.snr_db.size();
  std::vector<std::vector<BitCount>> results(cfg.trials, std::vector<BitCount>(ns * nsnr));
  std::vector<std::size_t> redraws(cfg.trials, 0);

  parallel_for(cfg.trials, [&](std::size_t t) {
    RngStream rng(cfg.seed, t);
    for (std::size_t attempt = 0;; ++attempt) {
      const ComplexMatrix h = rayleigh_channel(cfg.n_r, cfg.n_t, rng);
      try {
        for (std::size_t si = 0; si < nsnr; ++si) {
          const double sigma2 = cfg.noise_power(cfg.snr_db[si]);
          const auto counts =
              ber_block(strategies, h, sigma2, cfg.tx_power, cfg.symbols_per_trial, cfg.y0, rng);
          for (std::size_t k = 0; k < ns; ++k) results[t][si * ns + k] = counts[k];
        }
        return;
      } catch (const SingularMatrixError&) {
        if (attempt + 1 >= detail::kMaxRedrawsPerTrial) throw;
        ++redraws[t];
      }
    }
  });

  CurveTable table;
  for (std::size_t k = 0; k < ns; ++k)
    for (std::size_t si = 0; si < nsnr; ++si) {
      CurveRow row;
      row.strategy = strategies[k].label();
      row.n_t = cfg.n_t;
      row.n_r = cfg.n_r;
      row.snr_db = cfg.snr_db[si];
      row.trials = cfg.trials;
      row.samples.reserve(cfg.trials);
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        const auto& c = results[t][si * ns + k];
        row.errors += c.errors;
        row.bits += c.bits;
        row.samples.push_back(static_cast<double>(c.errors) / static_cast<double>(c.bits));
      }
      // Bits within a trial share one fading draw, so the spread is taken
      // across trials rather than across bits.
      detail::finish_row(row);
      const double p = static_cast<double>(row.errors) / static_cast<double>(row.bits);
      row.mean = p;
      if (cfg.trials == 1) row.stderr_ = std::sqrt(p * (1.0 - p) / static_cast<double>(row.bits));
      table.rows.push_back(std::move(row));
    }
  for (auto r : redraws) table.redraws += r;
  return table;
}

// ----------------------------------------------------------------- CSV

inline std::string format_number(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

/// Column order: strategy,n_t,n_r,snr_db,trials,mean_metric,stderr
inline void write_curve_csv(std::ostream& os, const CurveTable& table) {
  os << "strategy,n_t,n_r,snr_db,trials,mean_metric,stderr\n";
  for (const auto& r : table.rows)
    os << r.strategy << ',' << r.n_t << ',' << r.n_r << ',' << format_number(r.snr_db) << ','
       << r.trials << ',' << format_number(r.mean) << ',' << format_number(r.stderr_) << '\n';
}

}  // namespace milac
