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
 * @file network.hpp
 * @brief Physical model of a reconfigurable multiport analog computer.
 *
 * A network has P = N + M ports. The first N ports are driven by voltage
 * sources with series admittance y0, the remaining M ports are terminated in
 * y0. Component Y(i,k), i != k, links port i to port k; Y(k,k) links port k to
 * ground. The normalized operator P = Y/y0 + I maps port voltages v to the
 * source vector: P v = [u; 0].
 *
 * Two independent simulators are provided. simulate_nodal() solves the full
 * P x P system; simulate_blockwise() evaluates the Schur-complement closed
 * forms. They must agree, which the test suite relies on.
 */
#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include "milac/numerics.hpp"

namespace milac {

/// Default reference admittance, 1/50 ohm.
inline constexpr double kDefaultY0 = 0.02;

/// Pivot-ratio level above which a network is reported as ill-conditioned.
inline constexpr double kIllConditionedRatio = 1e10;

class MilacNetwork {
 public:
  /// components(i,k) holds the tunable admittance Y(i,k) in siemens.
  MilacNetwork(std::size_t n_in, std::size_t m_out, double y0, ComplexMatrix components)
      : n_in_(n_in), m_out_(m_out), y0_(y0), components_(std::move(components)) {
    if (m_out_ < 1) throw std::invalid_argument("MilacNetwork: at least one output port required");
    if (!(y0_ > 0.0) || !std::isfinite(y0_))
      throw std::invalid_argument("MilacNetwork: y0 must be positive and finite");
    const std::size_t p = n_in_ + m_out_;
    if (components_.rows() != p || components_.cols() != p)
      throw ShapeError("MilacNetwork: component grid must be " + std::to_string(p) + "x" +
                       std::to_string(p));
  }

  std::size_t n_in() const noexcept { return n_in_; }
  std::size_t m_out() const noexcept { return m_out_; }
  std::size_t ports() const noexcept { return n_in_ + m_out_; }
  double y0() const noexcept { return y0_; }
  const ComplexMatrix& components() const noexcept { return components_; }

  friend bool operator==(const MilacNetwork&, const MilacNetwork&) = default;

 private:
  std::size_t n_in_;
  std::size_t m_out_;
  double y0_;
  ComplexMatrix components_;
};

/// The four blocks of P split after the N driven ports.
struct PartitionedP {
  ComplexMatrix p11, p12, p21, p22;

  PartitionedP(ComplexMatrix a11, ComplexMatrix a12, ComplexMatrix a21, ComplexMatrix a22)
      : p11(std::move(a11)), p12(std::move(a12)), p21(std::move(a21)), p22(std::move(a22)) {
    if (!p11.is_square() || !p22.is_square() || p12.rows() != p11.rows() ||
        p12.cols() != p22.cols() || p21.rows() != p22.rows() || p21.cols() != p11.cols())
      throw ShapeError("PartitionedP: inconsistent block dimensions");
  }

  static PartitionedP split(const ComplexMatrix& full, std::size_t n) {
    if (!full.is_square() || n > full.rows()) throw ShapeError("PartitionedP::split");
    const std::size_t m = full.rows() - n;
    return {full.block(0, 0, n, n), full.block(0, n, n, m), full.block(n, 0, m, n),
            full.block(n, n, m, m)};
  }

  std::size_t n() const noexcept { return p11.rows(); }
  std::size_t m() const noexcept { return p22.rows(); }

  ComplexMatrix full() const {
    ComplexMatrix out(n() + m(), n() + m());
    out.set_block(0, 0, p11);
    out.set_block(0, n(), p12);
    out.set_block(n(), 0, p21);
    out.set_block(n(), n(), p22);
    return out;
  }
};

/// [Y](i,k) = -Y(i,k) off the diagonal, [Y](k,k) = sum over p of Y(p,k).
inline ComplexMatrix admittance_matrix(const MilacNetwork& net) {
  const auto& c = net.components();
  const std::size_t p = net.ports();
  ComplexMatrix y(p, p);
  for (std::size_t k = 0; k < p; ++k) {
    Complex colsum{};
    for (std::size_t i = 0; i < p; ++i) {
      colsum += c(i, k);
      if (i != k) y(i, k) = -c(i, k);
    }
    y(k, k) = colsum;
  }
  return y;
}

inline ComplexMatrix p_matrix_full(const MilacNetwork& net) {
  ComplexMatrix p = admittance_matrix(net) * Complex(1.0 / net.y0());
  for (std::size_t k = 0; k < p.rows(); ++k) p(k, k) += 1.0;
  return p;
}

inline PartitionedP p_matrix(const MilacNetwork& net) {
  return PartitionedP::split(p_matrix_full(net), net.n_in());
}

/// Component values that realize an arbitrary target P.
inline MilacNetwork components_from_p(const PartitionedP& p, double y0) {
  if (!(y0 > 0.0) || !std::isfinite(y0))
    throw std::invalid_argument("components_from_p: y0 must be positive and finite");
  const ComplexMatrix full = p.full();
  const std::size_t n = full.rows();
  ComplexMatrix c(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex colsum{};
    for (std::size_t i = 0; i < n; ++i) {
      colsum += full(i, k);
      if (i != k) c(i, k) = -y0 * full(i, k);
    }
    c(k, k) = y0 * colsum - y0;
  }
  return MilacNetwork(p.n(), p.m(), y0, std::move(c));
}

struct PortVoltages {
  ComplexMatrix v1;  ///< N x K voltages on the driven ports
  ComplexMatrix v2;  ///< M x K voltages on the undriven ports
  double pivot_ratio = 1.0;
  bool ill_conditioned = false;
};

/**
 * Circuit-level reference: solves P v = [u; 0] on the whole network. u may
 * carry several excitation columns at once. Uses no block formulas.
 */
inline PortVoltages simulate_nodal(const MilacNetwork& net, const ComplexMatrix& u) {
  if (u.rows() != net.n_in())
    throw ShapeError("simulate_nodal: input has " + std::to_string(u.rows()) +
                     " rows, network has " + std::to_string(net.n_in()) + " driven ports");
  LuFactorization lu(p_matrix_full(net), "P");
  ComplexMatrix rhs(net.ports(), u.cols());
  rhs.set_block(0, 0, u);
  const ComplexMatrix v = lu.solve(rhs);
  PortVoltages out{v.block(0, 0, net.n_in(), u.cols()),
                   v.block(net.n_in(), 0, net.m_out(), u.cols()), lu.pivot_ratio(), false};
  out.ill_conditioned = out.pivot_ratio > kIllConditionedRatio;
  return out;
}

/// The M x N linear map u -> v2 realized by the network.
inline ComplexMatrix transfer_matrix(const MilacNetwork& net) {
  return simulate_nodal(net, ComplexMatrix::identity(net.n_in())).v2;
}

enum class BlockVariant { ViaP11, ViaP22 };

/// Closed-form block evaluation of the port voltages.
inline PortVoltages simulate_blockwise(const PartitionedP& p, const ComplexMatrix& u,
                                       BlockVariant variant) {
  if (u.rows() != p.n()) throw ShapeError("simulate_blockwise: input size mismatch");
  if (variant == BlockVariant::ViaP11) {
    LuFactorization p11(p.p11, "P11");
    const ComplexMatrix p11_inv_p12 = p11.solve(p.p12);
    const ComplexMatrix p11_inv_u = p11.solve(u);
    // S = P21 P11^-1 P12 - P22
    LuFactorization schur(p.p21 * p11_inv_p12 - p.p22, "P21*P11^-1*P12 - P22");
    const ComplexMatrix v2 = schur.solve(p.p21 * p11_inv_u);
    const ComplexMatrix v1 = p11_inv_u - p11_inv_p12 * v2;
    return {v1, v2, 1.0, false};
  }
  LuFactorization p22(p.p22, "P22");
  const ComplexMatrix p22_inv_p21 = p22.solve(p.p21);
  // T = P12 P22^-1 P21 - P11
  LuFactorization schur(p.p12 * p22_inv_p21 - p.p11, "P12*P22^-1*P21 - P11");
  const ComplexMatrix v1 = -schur.solve(u);
  const ComplexMatrix v2 = -(p22_inv_p21 * v1);
  return {v1, v2, 1.0, false};
}

/// Malformed network text.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = first + tok.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw FormatError("network text line " + std::to_string(line) + ": bad number '" + tok +
                      "'");
  return v;
}

}  // namespace detail

/**
 * Writes the plain-text network format:
 *
 *     MILAC v1 N M y0
 *     i k re im          (P*P lines, 1-based, row-major over i then k)
 *
 * Numbers use the shortest round-trip representation, so read_network()
 * reproduces every finite value bit for bit.
 */
inline void write_network(std::ostream& os, const MilacNetwork& net) {
  os << "MILAC v1 " << net.n_in() << ' ' << net.m_out() << ' '
     << detail::format_double(net.y0()) << '\n';
  const auto& c = net.components();
  for (std::size_t i = 0; i < net.ports(); ++i)
    for (std::size_t k = 0; k < net.ports(); ++k)
      os << i + 1 << ' ' << k + 1 << ' ' << detail::format_double(c(i, k).real()) << ' '
         << detail::format_double(c(i, k).imag()) << '\n';
}

inline MilacNetwork read_network(std::istream& is) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(is, line)) throw FormatError("network text: empty input");
  std::istringstream hdr(line);
  std::string magic, version, y0tok;
  long long n = -1, m = -1;
  if (!(hdr >> magic >> version >> n >> m >> y0tok) || magic != "MILAC" || version != "v1" ||
      n < 0 || m < 1)
    throw FormatError("network text: header must be 'MILAC v1 N M y0'");
  const double y0 = detail::parse_double(y0tok, lineno);
  const std::size_t p = static_cast<std::size_t>(n + m);
  ComplexMatrix c(p, p);
  std::vector<bool> seen(p * p, false);
  std::size_t count = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    long long i = 0, k = 0;
    std::string re, im, extra;
    if (!(ls >> i >> k >> re >> im) || (ls >> extra))
      throw FormatError("network text line " + std::to_string(lineno) +
                        ": expected 'i k re im'");
    if (i < 1 || k < 1 || static_cast<std::size_t>(i) > p || static_cast<std::size_t>(k) > p)
      throw FormatError("network text line " + std::to_string(lineno) + ": index out of range");
    const std::size_t idx = static_cast<std::size_t>(i - 1) * p + static_cast<std::size_t>(k - 1);
    if (seen[idx])
      throw FormatError("network text line " + std::to_string(lineno) + ": duplicate entry");
    seen[idx] = true;
    c(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(k - 1)) =
        Complex(detail::parse_double(re, lineno), detail::parse_double(im, lineno));
    ++count;
  }
  if (count != p * p)
    throw FormatError("network text: expected " + std::to_string(p * p) + " entries, got " +
                      std::to_string(count));
  return MilacNetwork(static_cast<std::size_t>(n), static_cast<std::size_t>(m), y0, std::move(c));
}

}  // namespace milac
