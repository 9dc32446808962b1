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
 * @file complexity.hpp
 * @brief Real-operation counts per coherence block for digital and analog
 * beamforming, evaluated as exact rationals.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "milac/estimators.hpp"

namespace milac {

/// Exact fraction of 64-bit integers; arithmetic throws on overflow.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1) { assign(num, den); }

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  bool is_integer() const noexcept { return den_ == 1; }

  double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  /// Nearest integer, halves rounded away from zero.
  std::int64_t round() const noexcept {
    const std::int64_t q = num_ / den_, r = num_ % den_;
    if (2 * (r < 0 ? -r : r) >= den_) return q + (num_ < 0 ? -1 : 1);
    return q;
  }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from_wide(static_cast<__int128>(a.num_) * b.den_ +
                         static_cast<__int128>(b.num_) * a.den_,
                     static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return a + Rational(-b.num_, b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_wide(static_cast<__int128>(a.num_) * b.num_,
                     static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
    return from_wide(static_cast<__int128>(a.num_) * b.den_,
                     static_cast<__int128>(a.den_) * b.num_);
  }
  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const __int128 l = static_cast<__int128>(a.num_) * b.den_;
    const __int128 r = static_cast<__int128>(b.num_) * a.den_;
    return l < r ? std::strong_ordering::less
                 : (l > r ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  static Rational from_wide(__int128 n, __int128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    __int128 a = n < 0 ? -n : n, b = d;
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      n /= a;
      d /= a;
    }
    constexpr __int128 lim = std::numeric_limits<std::int64_t>::max();
    if (n > lim || n < -lim || d > lim) throw std::overflow_error("Rational: overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
  }
  void assign(std::int64_t n, std::int64_t d) {
    if (d == 0) throw std::domain_error("Rational: zero denominator");
    *this = from_wide(n, d);
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Scientific notation with the given number of significant figures, e.g. 1.5e+04.
inline std::string to_sci(double v, int sig = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*e", std::max(sig - 1, 0), v);
  return buf;
}

enum class Task { ZeroForcing, MatchedFiltering, DFT, GenericLMMSE, PerSymbolProduct };
enum class Realization { Digital, MiLAC };

inline std::string_view to_string(Task t) {
  switch (t) {
    case Task::ZeroForcing: return "zero-forcing";
    case Task::MatchedFiltering: return "matched-filtering";
    case Task::DFT: return "dft";
    case Task::GenericLMMSE: return "lmmse";
    case Task::PerSymbolProduct: return "per-symbol-product";
  }
  return "?";
}

inline std::string_view to_string(Realization r) {
  return r == Realization::Digital ? "digital" : "milac";
}

/// Missing or invalid dimension for a count.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/**
 * Dimension tuple for an operation count. n_t defaults to n_r (square
 * system). GenericLMMSE reads X = n_t and Y = n_r; PerSymbolProduct reads
 * n_rf and n_s.
 */
struct ComplexityModel {
  Task task = Task::ZeroForcing;
  Realization realization = Realization::Digital;
  std::optional<std::int64_t> n_t, n_r, n_rf, n_s;
  std::int64_t tau = 100;
};

namespace detail {

inline std::int64_t require(const std::optional<std::int64_t>& v, const char* name) {
  if (!v) throw ConfigurationError(std::string("complexity: missing dimension ") + name);
  if (*v < 1) throw ConfigurationError(std::string("complexity: ") + name + " must be >= 1");
  return *v;
}

inline std::int64_t exact_log2(std::int64_t n) {
  if (n < 1 || (n & (n - 1)) != 0)
    throw ConfigurationError("complexity: the FFT count needs N_R to be a power of two");
  std::int64_t k = 0;
  while ((std::int64_t{1} << k) < n) ++k;
  return k;
}

}  // namespace detail

/**
 * Per-coherence-block real operations.
 *
 *   zero-forcing  MiLAC 6 N_T N_R;  digital 8(N_T N_R^2 + N_R^3/3) + 8 N_T N_R tau
 *   matched filt. MiLAC 4 N_T N_R;  digital 8 N_T N_R tau
 *   DFT           MiLAC 0;          digital (34/9) N_R log2(N_R) tau, rounded
 *   LMMSE         MiLAC 6XY;        digital 8(XY^2 + X^2 Y + min(X^3,Y^3)/3)
 *   per-symbol    MiLAC 0;          digital 8 N_RF N_S tau
 */
inline Rational ops_per_block(const ComplexityModel& m) {
  if (m.tau < 1) throw ConfigurationError("complexity: tau must be >= 1");
  const bool digital = m.realization == Realization::Digital;
  const Rational tau(m.tau);
  switch (m.task) {
    case Task::ZeroForcing: {
      const Rational nr(detail::require(m.n_r, "n_r"));
      const Rational nt(m.n_t ? detail::require(m.n_t, "n_t") : nr.num());
      if (!digital) return Rational(6) * nt * nr;
      return Rational(8) * (nt * nr * nr + nr * nr * nr / Rational(3)) +
             Rational(8) * nt * nr * tau;
    }
    case Task::MatchedFiltering: {
      const Rational nr(detail::require(m.n_r, "n_r"));
      const Rational nt(m.n_t ? detail::require(m.n_t, "n_t") : nr.num());
      if (!digital) return Rational(4) * nt * nr;
      return Rational(8) * nt * nr * tau;
    }
    case Task::DFT: {
      const std::int64_t nr = detail::require(m.n_r, "n_r");
      if (!digital) return Rational(0);
      const Rational exact = Rational(34, 9) * Rational(nr) * Rational(detail::exact_log2(nr)) * tau;
      return Rational(exact.round());
    }
    case Task::GenericLMMSE: {
      const Rational y(detail::require(m.n_r, "n_r"));
      const Rational x(m.n_t ? detail::require(m.n_t, "n_t") : y.num());
      if (!digital) return Rational(6) * x * y;
      const Rational cube = std::min(x * x * x, y * y * y);
      return Rational(8) * (x * y * y + x * x * y + cube / Rational(3));
    }
    case Task::PerSymbolProduct: {
      const Rational nrf(detail::require(m.n_rf, "n_rf"));
      const Rational ns(detail::require(m.n_s, "n_s"));
      if (!digital) return Rational(0);
      return Rational(8) * nrf * ns * tau;
    }
  }
  throw std::logic_error("ops_per_block: unknown task");
}

struct Gain {
  Rational value;              ///< digital / MiLAC, or digital - 0 for the DFT
  bool absolute_saving = false;

  /// Two significant figures, e.g. "1.5e+04".
  std::string rounded() const { return to_sci(value.to_double(), 2); }
};

/// Digital-over-MiLAC gain for a square N_T = N_R system.
inline Gain gain(Task task, std::int64_t n_r, std::int64_t tau) {
  ComplexityModel d{task, Realization::Digital, n_r, n_r, std::nullopt, std::nullopt, tau};
  ComplexityModel a = d;
  a.realization = Realization::MiLAC;
  const Rational dig = ops_per_block(d), ana = ops_per_block(a);
  if (ana == Rational(0)) return {dig - ana, true};
  return {dig / ana, false};
}

struct EstimatorCounts {
  Rational milac;
  Rational digital;
};

/// Per-estimator counts for X unknowns and Y observations.
inline EstimatorCounts estimator_counts(EstimatorTag tag, std::int64_t x, std::int64_t y) {
  if (x < 1 || y < 1) throw ConfigurationError("estimator_counts: X and Y must be >= 1");
  const Rational X(x), Y(y), three(3), eight(8);
  const Rational milac(static_cast<std::int64_t>(
      config_op_count(tag, static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(y))));
  switch (tag) {
    case EstimatorTag::LMMSE:
    case EstimatorTag::GLS:
      return {milac, eight * (X * Y * Y + X * X * Y + std::min(X * X * X, Y * Y * Y) / three)};
    case EstimatorTag::RLS:
    case EstimatorTag::OLS:
      return {milac, eight * std::min(X * X * Y + X * X * X / three, X * Y * Y + Y * Y * Y / three)};
    case EstimatorTag::GMF:
      return {milac, eight * (X * X + X * Y + Y * Y)};
    case EstimatorTag::OMF:
      return {milac, eight * X * Y};
  }
  throw std::logic_error("estimator_counts: unknown estimator");
}

/**
 * Cost of designing an R-ZFBF/ZFBF precoder once, with no per-symbol term:
 * MiLAC 6 N_T N_R, digital 8(N_T N_R^2 + N_R^3/3).
 */
inline Rational zf_design_ops(Realization r, std::int64_t n_t, std::int64_t n_r) {
  if (n_t < 1 || n_r < 1) throw ConfigurationError("zf_design_ops: dimensions must be >= 1");
  const Rational nt(n_t), nr(n_r);
  if (r == Realization::MiLAC) return Rational(6) * nt * nr;
  return Rational(8) * (nt * nr * nr + nr * nr * nr / Rational(3));
}

}  // namespace milac
