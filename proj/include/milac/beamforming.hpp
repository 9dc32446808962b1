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
 * @file beamforming.hpp
 * @brief Network synthesis for precoding and combining.
 *
 * Conventions: H is N_R x N_T. A precoder W is N_T x N_S with N_S = N_R (one
 * stream per user); a combiner G is N_S x N_R with N_S = N_T.
 */
#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "milac/estimators.hpp"
#include "milac/network.hpp"
#include "milac/numerics.hpp"

namespace milac {

enum class Strategy { Arbitrary, RZFBF, ZFBF, MBF, MMSE, ZF, MF, DFT };
enum class Side { Transmitter, Receiver };
enum class Normalization { PerColumn, FrobeniusGlobal, None };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Arbitrary: return "arbitrary";
    case Strategy::RZFBF: return "R-ZFBF";
    case Strategy::ZFBF: return "ZFBF";
    case Strategy::MBF: return "MBF";
    case Strategy::MMSE: return "MMSE";
    case Strategy::ZF: return "ZF";
    case Strategy::MF: return "MF";
    case Strategy::DFT: return "DFT";
  }
  return "?";
}

inline std::optional<Strategy> parse_strategy(std::string_view name) {
  for (Strategy s : {Strategy::Arbitrary, Strategy::RZFBF, Strategy::ZFBF, Strategy::MBF,
                     Strategy::MMSE, Strategy::ZF, Strategy::MF, Strategy::DFT})
    if (to_string(s) == name) return s;
  return std::nullopt;
}

inline bool is_transmitter_strategy(Strategy s) {
  return s == Strategy::Arbitrary || s == Strategy::RZFBF || s == Strategy::ZFBF ||
         s == Strategy::MBF;
}

inline bool is_receiver_strategy(Strategy s) {
  return s == Strategy::Arbitrary || s == Strategy::MMSE || s == Strategy::ZF ||
         s == Strategy::MF || s == Strategy::DFT;
}

struct BeamformerSpec {
  Strategy strategy = Strategy::RZFBF;
  Side side = Side::Transmitter;
  double lambda = 1.0;
  Normalization normalization = Normalization::None;
  std::optional<ComplexMatrix> matrix;  ///< W or G when strategy == Arbitrary

  void validate() const {
    if (side == Side::Transmitter && !is_transmitter_strategy(strategy))
      throw std::invalid_argument(std::string(to_string(strategy)) +
                                  " is not a transmitter strategy");
    if (side == Side::Receiver && !is_receiver_strategy(strategy))
      throw std::invalid_argument(std::string(to_string(strategy)) +
                                  " is not a receiver strategy");
    if (strategy == Strategy::Arbitrary && !matrix)
      throw std::invalid_argument("arbitrary strategy needs an explicit matrix");
    const bool uses_lambda = strategy == Strategy::RZFBF || strategy == Strategy::MBF ||
                             strategy == Strategy::MMSE || strategy == Strategy::MF;
    if (uses_lambda && !(lambda > 0.0 && std::isfinite(lambda)))
      throw std::invalid_argument("lambda must be positive");
  }
};

/// Optimal regularizer N * sigma^2 / P_T, N being N_R at the transmitter and N_T at the receiver.
inline double optimal_lambda(std::size_t n, double noise_power, double tx_power) {
  return static_cast<double>(n) * noise_power / tx_power;
}

namespace detail {

/// Network with P = [[I, 0], [-A, I]], so that v2 = A u.
inline MilacNetwork feedforward_network(const ComplexMatrix& a, double y0) {
  const std::size_t n = a.cols(), m = a.rows();
  return components_from_p(
      PartitionedP(ComplexMatrix::identity(n), ComplexMatrix::zeros(n, m), -a,
                   ComplexMatrix::identity(m)),
      y0);
}

inline ComplexMatrix normalize(ComplexMatrix f, Normalization mode, std::size_t n_streams) {
  switch (mode) {
    case Normalization::None:
      return f;
    case Normalization::PerColumn:
      for (std::size_t j = 0; j < f.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < f.rows(); ++i) s += std::norm(f(i, j));
        const double inv = 1.0 / std::sqrt(s);
        for (std::size_t i = 0; i < f.rows(); ++i) f(i, j) *= inv;
      }
      return f;
    case Normalization::FrobeniusGlobal:
      return f * Complex(std::sqrt(static_cast<double>(n_streams)) / frobenius_norm(f));
  }
  return f;
}

}  // namespace detail

/// x = W s in the analog domain: N_S driven ports, N_T antenna ports.
inline MilacNetwork arbitrary_tx_network(const ComplexMatrix& w, double y0) {
  return detail::feedforward_network(w, y0);
}

/// z = G y in the analog domain: N_R driven ports, N_S output ports.
inline MilacNetwork arbitrary_rx_network(const ComplexMatrix& g, double y0) {
  return detail::feedforward_network(g, y0);
}

/**
 * Digital precoder for a multi-user downlink (N_R <= N_T).
 *
 *   R-ZFBF: F = H^H (H H^H + lambda I)^-1
 *   ZFBF:   F = H^H (H H^H)^-1
 *   MBF:    F = lambda^-1 H^H
 *
 * then normalized per column (uniform power per user), globally to
 * ||W||_F^2 = N_R, or left as is.
 */
inline ComplexMatrix precoder_digital(Strategy strategy, const ComplexMatrix& h, double lambda,
                                      Normalization normalization) {
  const std::size_t nr = h.rows();
  if (nr > h.cols()) throw ShapeError("precoder_digital: needs N_R <= N_T");
  const ComplexMatrix hh = h.adjoint();
  ComplexMatrix f;
  switch (strategy) {
    case Strategy::RZFBF: {
      if (!(lambda > 0.0)) throw std::invalid_argument("R-ZFBF needs lambda > 0");
      ComplexMatrix a = h * hh;
      for (std::size_t i = 0; i < nr; ++i) a(i, i) += lambda;
      f = hh * inverse(a, "H*H^H + lambda*I");
      break;
    }
    case Strategy::ZFBF:
      f = hh * inverse(h * hh, "H*H^H");
      break;
    case Strategy::MBF:
      if (!(lambda > 0.0)) throw std::invalid_argument("MBF needs lambda > 0");
      f = hh * Complex(1.0 / lambda);
      break;
    default:
      throw std::invalid_argument(std::string(to_string(strategy)) + " is not a precoder");
  }
  return detail::normalize(std::move(f), normalization, nr);
}

/**
 * Digital combiner for a single-user receiver (N_R >= N_T).
 *
 *   MMSE: G = (H^H H + lambda I)^-1 H^H
 *   ZF:   G = (H^H H)^-1 H^H
 *   MF:   G = lambda^-1 H^H
 */
inline ComplexMatrix combiner_digital(Strategy strategy, const ComplexMatrix& h, double lambda) {
  const std::size_t nt = h.cols();
  if (h.rows() < nt) throw ShapeError("combiner_digital: needs N_R >= N_T");
  const ComplexMatrix hh = h.adjoint();
  switch (strategy) {
    case Strategy::MMSE: {
      if (!(lambda > 0.0)) throw std::invalid_argument("MMSE needs lambda > 0");
      ComplexMatrix a = hh * h;
      for (std::size_t i = 0; i < nt; ++i) a(i, i) += lambda;
      return solve_linear(a, hh, "H^H*H + lambda*I");
    }
    case Strategy::ZF:
      return solve_linear(hh * h, hh, "H^H*H");
    case Strategy::MF:
      if (!(lambda > 0.0)) throw std::invalid_argument("MF needs lambda > 0");
      return hh * Complex(1.0 / lambda);
    default:
      throw std::invalid_argument(std::string(to_string(strategy)) + " is not a combiner");
  }
}

/// Estimator kind the analog network computes for an LMMSE-inspired strategy.
inline EstimatorKind lmmse_kind(Strategy s) {
  switch (s) {
    case Strategy::RZFBF: return {EstimatorTag::RLS, EstimatorForm::Form2};
    case Strategy::ZFBF: return {EstimatorTag::OLS, EstimatorForm::Form2};
    case Strategy::MBF: return {EstimatorTag::OMF, EstimatorForm::Form2};
    case Strategy::MMSE: return {EstimatorTag::RLS, EstimatorForm::Form1};
    case Strategy::ZF: return {EstimatorTag::OLS, EstimatorForm::Form1};
    case Strategy::MF: return {EstimatorTag::OMF, EstimatorForm::Form1};
    default:
      throw std::invalid_argument(std::string(to_string(s)) + " is not LMMSE-inspired");
  }
}

/**
 * Network that computes R-ZFBF/ZFBF/MBF (transmitter, P22-invertible rows)
 * or MMSE/ZF/MF (receiver, P11-invertible rows) directly from H.
 *
 * FrobeniusGlobal normalization scales the realized map by
 * c = sqrt(N_S) / ||F||_F, where F is the un-normalized matrix. The factor is
 * applied as P21 -> c P21 and P12 -> P12 / c, which leaves the Schur
 * complement unchanged and multiplies v2 by exactly c. c itself is computed
 * digitally from H. PerColumn normalization cannot be realized here.
 */
inline MilacNetwork lmmse_inspired_network(const BeamformerSpec& spec, const ComplexMatrix& h,
                                           double y0) {
  spec.validate();
  if (spec.normalization == Normalization::PerColumn)
    throw std::invalid_argument("per-column normalization is not available on the analog path");
  const EstimatorKind kind = lmmse_kind(spec.strategy);
  const bool tx = spec.side == Side::Transmitter;
  if (tx && h.rows() > h.cols()) throw ShapeError("transmitter needs N_R <= N_T");
  if (!tx && h.rows() < h.cols()) throw ShapeError("receiver needs N_R >= N_T");
  PartitionedP p = build_p(ObservationModel::scalar(h, spec.lambda), kind, SignBranch::Upper);
  if (spec.normalization == Normalization::FrobeniusGlobal) {
    const ComplexMatrix f = tx ? precoder_digital(spec.strategy, h, spec.lambda, Normalization::None)
                               : combiner_digital(spec.strategy, h, spec.lambda);
    const std::size_t streams = tx ? h.rows() : h.cols();
    const double c = std::sqrt(static_cast<double>(streams)) / frobenius_norm(f);
    p.p21 *= Complex(c);
    p.p12 *= Complex(1.0 / c);
  }
  return components_from_p(p, y0);
}

/// Unitary DFT matrix, G(i,k) = exp(-j 2 pi i k / n) / sqrt(n), zero-based.
inline ComplexMatrix dft_matrix(std::size_t n) {
  ComplexMatrix g(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      // reduce the exponent mod n before scaling to keep the phase accurate
      const double phase = -2.0 * std::numbers::pi * static_cast<double>((i * k) % n) /
                           static_cast<double>(n);
      g(i, k) = std::polar(scale, phase);
    }
  return g;
}

/**
 * Fixed network that outputs the DFT of its input, with components written
 * in closed form: Y(N+i, k) = y0/sqrt(n) exp(-j 2 pi i k / n) for the
 * lower-left block, Y(1,1) = -y0 sqrt(n), everything else 0.
 */
inline MilacNetwork dft_network(std::size_t n, double y0) {
  if (n < 1) throw std::invalid_argument("dft_network: n must be >= 1");
  ComplexMatrix c(2 * n, 2 * n);
  const ComplexMatrix g = dft_matrix(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) c(n + i, k) = y0 * g(i, k);
  c(0, 0) = -y0 * std::sqrt(static_cast<double>(n));
  return MilacNetwork(n, n, y0, std::move(c));
}

/// In-place iterative radix-2 FFT, unitary scaling. n must be a power of two.
inline std::vector<Complex> fft_unitary(std::vector<Complex> x) {
  const std::size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft_unitary: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    for (std::size_t start = 0; start < n; start += len)
      for (std::size_t k = 0; k < half; ++k) {
        const Complex w = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                                              static_cast<double>(len));
        const Complex a = x[start + k];
        const Complex b = w * x[start + k + half];
        x[start + k] = a + b;
        x[start + k + half] = a - b;
      }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& z : x) z *= scale;
  return x;
}

}  // namespace milac
