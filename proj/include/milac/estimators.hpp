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
 * @file estimators.hpp
 * @brief LMMSE estimation of x from y = Hx + n and its five special cases,
 * computed both digitally (closed forms) and by an analog network.
 *
 * Form1 is the "X x X inverse" expression, e.g. (H^H Cn^-1 H + Cx^-1)^-1 H^H
 * Cn^-1 y, and is realized by a network with an invertible P11 block. Form2
 * is the "Y x Y inverse" expression, e.g. Cx H^H (H Cx H^H + Cn)^-1 y, realized
 * with an invertible P22 block. The network has N = Y driven ports and M = X
 * output ports.
 */
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "milac/network.hpp"
#include "milac/numerics.hpp"

namespace milac {

enum class EstimatorTag { LMMSE, GLS, GMF, RLS, OLS, OMF };
enum class EstimatorForm { Form1, Form2 };

/// Sign branch of the block construction: Upper puts +Cn (or +I) in P11.
enum class SignBranch { Upper, Lower };

struct EstimatorKind {
  EstimatorTag tag = EstimatorTag::LMMSE;
  EstimatorForm form = EstimatorForm::Form1;
};

inline std::string_view to_string(EstimatorTag t) {
  switch (t) {
    case EstimatorTag::LMMSE: return "LMMSE";
    case EstimatorTag::GLS: return "GLS";
    case EstimatorTag::GMF: return "GMF";
    case EstimatorTag::RLS: return "RLS";
    case EstimatorTag::OLS: return "OLS";
    case EstimatorTag::OMF: return "OMF";
  }
  return "?";
}

/// True for the kinds that assume scalar covariances and use lambda.
inline bool uses_lambda(EstimatorTag t) {
  return t == EstimatorTag::RLS || t == EstimatorTag::OLS || t == EstimatorTag::OMF;
}

/**
 * Linear observation y = H x + n.
 *
 * c_x and c_n only matter for LMMSE/GLS/GMF; lambda only for RLS/OMF (OLS is
 * the lambda -> 0 limit and ignores it).
 */
struct ObservationModel {
  ComplexMatrix h;    ///< Y x X
  ComplexMatrix c_x;  ///< X x X, Hermitian positive definite
  ComplexMatrix c_n;  ///< Y x Y, Hermitian positive definite
  double lambda = 1.0;

  std::size_t x_dim() const noexcept { return h.cols(); }
  std::size_t y_dim() const noexcept { return h.rows(); }

  static ObservationModel scalar(ComplexMatrix h, double lambda) {
    const std::size_t x = h.cols(), y = h.rows();
    return {std::move(h), ComplexMatrix::identity(x), ComplexMatrix::identity(y), lambda};
  }
};

namespace detail {

inline void check_covariance(const ComplexMatrix& c, std::size_t dim, const char* name) {
  if (c.rows() != dim || c.cols() != dim)
    throw ShapeError(std::string(name) + " must be " + std::to_string(dim) + "x" +
                     std::to_string(dim));
  if (!is_hermitian(c)) throw std::invalid_argument(std::string(name) + " is not Hermitian");
  if (!is_positive_definite(c))
    throw std::invalid_argument(std::string(name) + " is not positive definite");
}

inline void validate(const ObservationModel& m, EstimatorKind kind) {
  if (m.h.size() == 0) throw ShapeError("observation matrix H is empty");
  const bool needs_cx = kind.tag == EstimatorTag::LMMSE || kind.tag == EstimatorTag::GMF ||
                        (kind.tag == EstimatorTag::GLS && kind.form == EstimatorForm::Form2);
  const bool needs_cn = kind.tag == EstimatorTag::LMMSE || kind.tag == EstimatorTag::GMF ||
                        (kind.tag == EstimatorTag::GLS && kind.form == EstimatorForm::Form1);
  if (needs_cx) check_covariance(m.c_x, m.x_dim(), "C_x");
  if (needs_cn) check_covariance(m.c_n, m.y_dim(), "C_n");
  if ((kind.tag == EstimatorTag::RLS || kind.tag == EstimatorTag::OMF) &&
      !(m.lambda > 0.0 && std::isfinite(m.lambda)))
    throw std::invalid_argument("lambda must be positive for " +
                                std::string(to_string(kind.tag)));
}

}  // namespace detail

/// Closed-form digital estimate. y may hold several observation columns.
inline ComplexMatrix estimate_digital(const ObservationModel& m, EstimatorKind kind,
                                      const ComplexMatrix& y) {
  detail::validate(m, kind);
  if (y.rows() != m.y_dim()) throw ShapeError("estimate_digital: y has wrong length");
  const ComplexMatrix& h = m.h;
  const ComplexMatrix hh = h.adjoint();
  const std::size_t nx = m.x_dim(), ny = m.y_dim();
  const bool form1 = kind.form == EstimatorForm::Form1;

  switch (kind.tag) {
    case EstimatorTag::LMMSE:
      if (form1) {
        const ComplexMatrix cn_inv_h = solve_linear(m.c_n, h, "C_n");
        const ComplexMatrix cn_inv_y = solve_linear(m.c_n, y, "C_n");
        const ComplexMatrix a = hh * cn_inv_h + inverse(m.c_x, "C_x");
        return solve_linear(a, hh * cn_inv_y, "H^H*C_n^-1*H + C_x^-1");
      } else {
        const ComplexMatrix cx_hh = m.c_x * hh;
        const ComplexMatrix a = h * cx_hh + m.c_n;
        return cx_hh * solve_linear(a, y, "H*C_x*H^H + C_n");
      }
    case EstimatorTag::GLS:
      if (form1) {
        const ComplexMatrix cn_inv_h = solve_linear(m.c_n, h, "C_n");
        const ComplexMatrix cn_inv_y = solve_linear(m.c_n, y, "C_n");
        return solve_linear(hh * cn_inv_h, hh * cn_inv_y, "H^H*C_n^-1*H");
      } else {
        const ComplexMatrix cx_hh = m.c_x * hh;
        return cx_hh * solve_linear(h * cx_hh, y, "H*C_x*H^H");
      }
    case EstimatorTag::GMF:
      return m.c_x * (hh * solve_linear(m.c_n, y, "C_n"));
    case EstimatorTag::RLS:
      if (form1) {
        ComplexMatrix a = hh * h;
        for (std::size_t i = 0; i < nx; ++i) a(i, i) += m.lambda;
        return solve_linear(a, hh * y, "H^H*H + lambda*I");
      } else {
        ComplexMatrix a = h * hh;
        for (std::size_t i = 0; i < ny; ++i) a(i, i) += m.lambda;
        return hh * solve_linear(a, y, "H*H^H + lambda*I");
      }
    case EstimatorTag::OLS:
      if (form1) return solve_linear(hh * h, hh * y, "H^H*H");
      return hh * solve_linear(h * hh, y, "H*H^H");
    case EstimatorTag::OMF:
      if (!(m.lambda > 0.0)) throw std::invalid_argument("OMF needs lambda > 0");
      return (hh * y) * Complex(1.0 / m.lambda);
  }
  throw std::logic_error("estimate_digital: unknown estimator");
}

/**
 * Block matrix that makes the network output v2 equal the selected estimator
 * when u = y. Form1 rows have P11 invertible, Form2 rows have P22 invertible.
 */
inline PartitionedP build_p(const ObservationModel& m, EstimatorKind kind,
                            SignBranch sign = SignBranch::Upper) {
  detail::validate(m, kind);
  const std::size_t nx = m.x_dim(), ny = m.y_dim();
  const double s = sign == SignBranch::Upper ? 1.0 : -1.0;
  const bool form1 = kind.form == EstimatorForm::Form1;
  const ComplexMatrix& h = m.h;
  ComplexMatrix hh = h.adjoint();
  const ComplexMatrix iy = ComplexMatrix::identity(ny);
  const ComplexMatrix ix = ComplexMatrix::identity(nx);
  const ComplexMatrix zy = ComplexMatrix::zeros(ny, ny);
  const ComplexMatrix zx = ComplexMatrix::zeros(nx, nx);
  const ComplexMatrix zyx = ComplexMatrix::zeros(ny, nx);

  switch (kind.tag) {
    case EstimatorTag::LMMSE:
      return {s * m.c_n, h, hh, -s * inverse(m.c_x, "C_x")};
    case EstimatorTag::GLS:
      if (form1) return {s * m.c_n, h, hh, zx};
      return {zy, h, hh, -s * inverse(m.c_x, "C_x")};
    case EstimatorTag::GMF:
      return {s * m.c_n, zyx, hh, -s * inverse(m.c_x, "C_x")};
    case EstimatorTag::RLS:
      if (form1) return {s * iy, h, hh, (-s * m.lambda) * ix};
      return {(s * m.lambda) * iy, h, hh, -s * ix};
    case EstimatorTag::OLS:
      if (form1) return {s * iy, h, hh, zx};
      return {zy, h, hh, -s * ix};
    case EstimatorTag::OMF:
      if (form1) return {s * iy, zyx, hh, (-s * m.lambda) * ix};
      return {(s * m.lambda) * iy, zyx, hh, -s * ix};
  }
  throw std::logic_error("build_p: unknown estimator");
}

/// Synthesizes the network for build_p() and reads the estimate off v2.
inline ComplexMatrix estimate_analog(const ObservationModel& m, EstimatorKind kind,
                                     SignBranch sign, double y0, const ComplexMatrix& y) {
  const MilacNetwork net = components_from_p(build_p(m, kind, sign), y0);
  return simulate_nodal(net, y).v2;
}

/// Real operations needed to set the components: 6XY, or 4XY for GMF/OMF.
inline std::uint64_t config_op_count(EstimatorTag tag, std::uint64_t x, std::uint64_t y) {
  if (x < 1 || y < 1) throw std::invalid_argument("config_op_count: X and Y must be >= 1");
  const bool mf = tag == EstimatorTag::GMF || tag == EstimatorTag::OMF;
  return (mf ? 4 : 6) * x * y;
}

}  // namespace milac
