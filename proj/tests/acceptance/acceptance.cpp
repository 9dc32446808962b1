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

// Acceptance run: one PASS/FAIL line per criterion, with the measured
// numbers underneath. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "milac/milac.hpp"
#include "oracles.hpp"

using namespace milac;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "ok    " : "FAIL  ") + what);
  }
  void info(const std::string& what) { notes.push_back("      " + what); }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

int failures = 0;

void criterion(const char* id, const char* title, double budget_s,
               const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.check(secs < budget_s, fmt("runtime %.2f s (budget %.0f s)", secs, budget_s));
  std::printf("%s %s  %s\n", id, out.pass ? "PASS" : "FAIL", title);
  for (const auto& n : out.notes) std::printf("      %s\n", n.c_str());
  std::fflush(stdout);
  if (!out.pass) ++failures;
}

// ------------------------------------------------------------------ AC1

void ac1(Outcome& out) {
  std::mt19937_64 g(101);
  std::uniform_int_distribution<std::size_t> dim(1, 16);
  std::uniform_real_distribution<double> lam(0.05, 5.0);
  const EstimatorTag tags[] = {EstimatorTag::LMMSE, EstimatorTag::GLS, EstimatorTag::GMF,
                               EstimatorTag::RLS,   EstimatorTag::OLS, EstimatorTag::OMF};
  double worst = 0.0;
  std::size_t comparisons = 0, bad = 0;
  for (int inst = 0; inst < 500; ++inst) {
    const std::size_t x = dim(g), y = dim(g);
    const ObservationModel m{oracle::random_matrix(y, x, g), oracle::random_hpd(x, g),
                             oracle::random_hpd(y, g), lam(g)};
    const auto obs = oracle::random_matrix(y, 1, g);
    for (auto tag : tags)
      for (auto form : {EstimatorForm::Form1, EstimatorForm::Form2}) {
        const bool gls_like = tag == EstimatorTag::GLS || tag == EstimatorTag::OLS;
        if (gls_like && form == EstimatorForm::Form1 && y < x) continue;
        if (gls_like && form == EstimatorForm::Form2 && y > x) continue;
        const EstimatorKind kind{tag, form};
        const auto digital = estimate_digital(m, kind, obs);
        for (auto sign : {SignBranch::Upper, SignBranch::Lower}) {
          const double e = relative_error(estimate_analog(m, kind, sign, kDefaultY0, obs), digital);
          worst = std::max(worst, e);
          ++comparisons;
          if (!(e <= 1e-8)) ++bad;
        }
      }
  }
  out.check(bad == 0, fmt("%zu analog/digital comparisons over 500 instances, %zu above 1e-8, "
                          "worst relative error %.2e",
                          comparisons, bad, worst));
}

// ------------------------------------------------------------------ AC2

void ac2(Outcome& out) {
  std::mt19937_64 g(202);
  std::uniform_int_distribution<std::size_t> dim(1, 32);
  double worst = 0.0;
  int done = 0, redraws = 0;
  while (done < 500) {
    const std::size_t n = dim(g), m = dim(g);
    const auto p = PartitionedP::split(oracle::random_matrix(n + m, n + m, g), n);
    const auto u = oracle::random_matrix(n, 1, g);
    try {
      const auto a = simulate_nodal(components_from_p(p, kDefaultY0), u);
      const auto b = simulate_blockwise(p, u, BlockVariant::ViaP11);
      const auto c = simulate_blockwise(p, u, BlockVariant::ViaP22);
      for (const auto* v : {&b, &c}) {
        worst = std::max(worst, relative_error(v->v1, a.v1));
        worst = std::max(worst, relative_error(v->v2, a.v2));
      }
      ++done;
    } catch (const SingularMatrixError&) {
      ++redraws;
    }
  }
  out.check(worst <= 1e-9, fmt("500 instances (%d redrawn), worst nodal vs block-formula "
                               "relative error %.2e (tol 1e-9)",
                               redraws, worst));
}

// ------------------------------------------------------------------ AC3

void ac3(Outcome& out) {
  const Gain zf = gain(Task::ZeroForcing, 8192, 100);
  out.check(zf.rounded() == "1.5e+04" && std::abs(zf.value.to_double() - 1.47e4) < 0.005e4,
            fmt("ZF gain %s = %.6g, rounds to %s", zf.value.str().c_str(), zf.value.to_double(),
                zf.rounded().c_str()));
  const Gain mf = gain(Task::MatchedFiltering, 8192, 100);
  out.check(mf.value == Rational(200), fmt("MF gain %s", mf.value.str().c_str()));
  const Gain dft = gain(Task::DFT, 8192, 100);
  out.check(dft.absolute_saving && dft.rounded() == "4.0e+07",
            fmt("DFT saving %s ops per block, rounds to %s", dft.value.str().c_str(),
                dft.rounded().c_str()));
}

// ------------------------------------------------------------------ AC4

struct Paired {
  double mean = 0.0, se = 0.0;
};

Paired paired(const CurveRow& a, const CurveRow& b) {
  const std::size_t n = a.samples.size();
  double s = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a.samples[i] - b.samples[i];
  const double mean = s / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a.samples[i] - b.samples[i] - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n))};
}

LinkConfig link(std::size_t nt, std::size_t nr, std::vector<double> snr, std::size_t trials,
                std::uint64_t seed) {
  LinkConfig c;
  c.n_t = nt;
  c.n_r = nr;
  c.snr_db = std::move(snr);
  c.trials = trials;
  c.seed = seed;
  return c;
}

const std::vector<double> kFigGrid{-10, -5, 0, 5, 10, 15, 20, 25, 30};

void ac4(Outcome& out) {
  const Strategy precoders[] = {Strategy::RZFBF, Strategy::ZFBF, Strategy::MBF};
  std::vector<SumRateStrategy> s;
  for (auto path : {PrecoderPath::Digital, PrecoderPath::MilacArbitrary, PrecoderPath::MilacLmmse})
    for (auto st : precoders) s.push_back({path, st, std::nullopt, std::nullopt});
  const auto t = run_sumrate_experiment(link(4, 4, kFigGrid, 2000, 5), s);
  out.info(fmt("4x4, 2000 trials, %zu singular redraws", t.redraws));
  auto row = [&](const char* label, double snr) -> const CurveRow& { return t.find(label, snr); };

  // (a)
  double worst = 0.0;
  for (double snr : kFigGrid)
    for (auto st : precoders) {
      const auto& d = row(SumRateStrategy{PrecoderPath::Digital, st, {}, {}}.label().c_str(), snr);
      const auto& a =
          row(SumRateStrategy{PrecoderPath::MilacArbitrary, st, {}, {}}.label().c_str(), snr);
      for (std::size_t i = 0; i < d.samples.size(); ++i)
        worst = std::max(worst, std::abs(d.samples[i] - a.samples[i]));
    }
  out.check(worst <= 1e-6,
            fmt("(a) synthesized-W curves vs digital, worst per-trial gap %.2e bits/s/Hz", worst));

  // (b)
  bool best = true;
  for (double snr : kFigGrid)
    for (const char* other : {"digital:ZFBF", "digital:MBF"}) {
      const Paired d = paired(row("digital:R-ZFBF", snr), row(other, snr));
      const bool ok = d.mean > d.se;
      best = best && ok;
      if (!ok || snr == -10 || snr == 30)
        out.info(fmt("    R-ZFBF - %s at %+.0f dB: %.4f +- %.4f", other + 8, snr, d.mean, d.se));
    }
  out.check(best, "(b) R-ZFBF above ZFBF and MBF at every SNR by more than the paired standard error");

  // (c)
  const double zf_gap = std::abs(row("digital:ZFBF", 30).mean - row("digital:R-ZFBF", 30).mean);
  const double mf_gap = std::abs(row("digital:MBF", -10).mean - row("digital:R-ZFBF", -10).mean);
  out.check(zf_gap < 0.1, fmt("(c) |ZFBF - R-ZFBF| at 30 dB = %.4f (tol 0.1)", zf_gap));
  out.check(mf_gap < 0.1, fmt("(c) |MBF - R-ZFBF| at -10 dB = %.4f (tol 0.1)", mf_gap));

  // (d)
  for (auto st : precoders) {
    const std::string d = SumRateStrategy{PrecoderPath::Digital, st, {}, {}}.label();
    const std::string m = SumRateStrategy{PrecoderPath::MilacLmmse, st, {}, {}}.label();
    double worst_rel = 0.0, at = 0.0;
    std::string trace;
    for (double snr : kFigGrid) {
      const double rel = (row(m.c_str(), snr).mean - row(d.c_str(), snr).mean) / row(d.c_str(), snr).mean;
      trace += fmt(" %+.0f:%+.1f%%", snr, 100.0 * rel);
      if (snr <= 10 && std::abs(rel) > std::abs(worst_rel)) {
        worst_rel = rel;
        at = snr;
      }
    }
    out.check(std::abs(worst_rel) <= 0.05,
              fmt("(d) %s analog-LMMSE vs digital, largest deviation at SNR <= 10 dB: %+.1f%% "
                  "at %+.0f dB (tol 5%%)",
                  to_string(st).data(), 100.0 * worst_rel, at));
    out.info("    relative gap by SNR:" + trace);
  }
}

// ------------------------------------------------------------------ AC5

void ac5(Outcome& out) {
  const Strategy receivers[] = {Strategy::MMSE, Strategy::ZF, Strategy::MF};
  std::vector<BerStrategy> s;
  for (auto st : receivers) {
    s.push_back({CombinerPath::Digital, st});
    s.push_back({CombinerPath::Milac, st});
  }
  auto cfg = link(4, 4, kFigGrid, 2000, 6);
  cfg.symbols_per_trial = 100;
  const auto t = run_ber_experiment(cfg, s);

  bool identical = true, monotone = true;
  for (auto st : receivers) {
    const auto dl = BerStrategy{CombinerPath::Digital, st}.label();
    const auto ml = BerStrategy{CombinerPath::Milac, st}.label();
    std::string trace;
    for (std::size_t i = 0; i < kFigGrid.size(); ++i) {
      const auto& d = t.find(dl, kFigGrid[i]);
      const auto& m = t.find(ml, kFigGrid[i]);
      identical = identical && d.errors == m.errors;
      trace += fmt(" %.2e", m.mean);
      if (i > 0) {
        for (const auto& lbl : {dl, ml}) {
          const auto& lo = t.find(lbl, kFigGrid[i - 1]);
          const auto& hi = t.find(lbl, kFigGrid[i]);
          if (hi.mean > lo.mean + 3.0 * std::hypot(lo.stderr_, hi.stderr_)) monotone = false;
        }
      }
    }
    out.info(fmt("    %s BER over -10..30 dB:", to_string(st).data()) + trace);
  }
  out.check(identical, fmt("analog and digital receivers: identical error counts at all %zu "
                           "(receiver, SNR) points, %llu bits each",
                           3 * kFigGrid.size(), static_cast<unsigned long long>(t.rows[0].bits)));
  out.check(monotone, "BER non-increasing in SNR for every receiver (3 sigma allowance)");

  // one fading draw per symbol: 5e5 symbols, 10^6 bits per point
  const auto one = link(1, 1, {0, 5, 10, 15, 20}, 500'000, 61);
  const auto r = run_ber_experiment(one, {{CombinerPath::Digital, Strategy::ZF},
                                          {CombinerPath::Milac, Strategy::ZF}});
  bool close = true;
  for (double snr : one.snr_db) {
    const double p = oracle::rayleigh_qpsk_ber(std::pow(10.0, snr / 10.0));
    for (const char* lbl : {"digital:ZF", "milac:ZF"}) {
      const auto& row = r.find(lbl, snr);
      const double sigma = row.stderr_;
      const double z = (row.mean - p) / sigma;
      close = close && std::abs(z) <= 3.0;
      if (lbl[0] == 'm')
        out.info(fmt("    1x1 ZF at %+.0f dB: measured %.5f, closed form %.5f, z = %+.2f (%llu bits)",
                     snr, row.mean, p, z, static_cast<unsigned long long>(row.bits)));
    }
  }
  out.check(close, "1x1 ZF BER within 3 sigma of the Rayleigh closed form at 10^6 bits");
}

// ------------------------------------------------------------------ AC6

void ac6(Outcome& out) {
  std::mt19937_64 g(606);
  double worst_fft = 0.0, worst_unit = 0.0, worst_parseval = 0.0;
  for (std::size_t n : {1u, 2u, 4u, 8u, 16u, 64u, 256u}) {
    const auto net = dft_network(n, kDefaultY0);
    const auto y = oracle::random_matrix(n, 1, g);
    std::vector<Complex> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = y(i, 0);
    const auto v2 = simulate_nodal(net, y).v2;
    const auto ref = oracle::recursive_fft(x);
    double e = 0.0, in = 0.0, outp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      e = std::max(e, std::abs(v2(i, 0) - ref[i]));
      in += std::norm(x[i]);
      outp += std::norm(v2(i, 0));
    }
    const auto gm = transfer_matrix(net);
    const double unit = max_abs(gm.adjoint() * gm - ComplexMatrix::identity(n));
    const double pars = std::abs(std::sqrt(outp) - std::sqrt(in)) / std::sqrt(in);
    worst_fft = std::max(worst_fft, e);
    worst_unit = std::max(worst_unit, unit);
    worst_parseval = std::max(worst_parseval, pars);
    out.info(fmt("    N=%zu: |v2 - fft| %.1e, |G^H G - I| %.1e, Parseval %.1e", n, e, unit, pars));
  }
  out.check(worst_fft <= 1e-9, fmt("network output vs FFT oracle, worst %.2e (tol 1e-9)", worst_fft));
  out.check(worst_unit <= 1e-10 && worst_parseval <= 1e-10,
            fmt("unitarity %.2e, Parseval %.2e (tol 1e-10)", worst_unit, worst_parseval));
}

// ------------------------------------------------------------------ AC7

void ac7(Outcome& out) {
  const std::pair<int, double> expected[] = {{4, 20.2}, {2, 9.30}, {1, 4.40}};
  for (auto [bits, sqnr] : expected) {
    const double got = lloyd_max_codebook(bits).sqnr_db();
    out.check(std::abs(got - sqnr) <= 0.1,
              fmt("Lloyd-Max %d bit(s) per real dimension: SQNR %.3f dB (expected %.2f +- 0.1)",
                  bits, got, sqnr));
  }

  std::vector<SumRateStrategy> s{{PrecoderPath::MilacLmmse, Strategy::RZFBF, {}, {}}};
  const std::pair<int, double> pairs[] = {{8, 20.0}, {4, 10.0}, {2, 5.0}};
  for (auto [b, rho] : pairs) {
    s.push_back({PrecoderPath::MilacLmmse, Strategy::RZFBF, std::nullopt, b});
    s.push_back({PrecoderPath::MilacLmmse, Strategy::RZFBF, rho, std::nullopt});
  }
  const auto t = run_sumrate_experiment(link(4, 4, kFigGrid, 2000, 10), s);
  out.info(fmt("4x4 analog-LMMSE R-ZFBF, 2000 trials, %zu redraws", t.redraws));
  for (auto [b, rho] : pairs) {
    const std::string q = s[0].label() + "@B" + std::to_string(b);
    const std::string c = SumRateStrategy{PrecoderPath::MilacLmmse, Strategy::RZFBF, rho, {}}.label();
    double worst = 0.0, at = 0.0;
    std::string trace;
    for (double snr : kFigGrid) {
      const double rq = t.find(q, snr).mean, rc = t.find(c, snr).mean;
      const double rel = (rq - rc) / rc;
      trace += fmt(" %+.0f:%+.1f%%", snr, 100.0 * rel);
      if (std::abs(rel) > std::abs(worst)) {
        worst = rel;
        at = snr;
      }
    }
    out.check(std::abs(worst) <= 0.10,
              fmt("B=%d vs noisy CSI rho=%.0f dB: largest gap %+.1f%% at %+.0f dB (tol 10%%)", b,
                  rho, 100.0 * worst, at));
    out.info("    quantized vs noisy-CSI rate by SNR:" + trace);
  }
}

// ------------------------------------------------------------------ AC8

void ac8(Outcome& out) {
  const Rational milac = zf_design_ops(Realization::MiLAC, 4096, 4096);
  const Rational digital = zf_design_ops(Realization::Digital, 256, 256);
  const double ratio = digital.to_double() / milac.to_double();
  out.check(ratio <= 2.0 && ratio >= 0.5,
            fmt("design cost: analog 4096x4096 %s ops, digital 256x256 %s ops, ratio %.3f "
                "(within 2x)",
                milac.str().c_str(), digital.str().c_str(), ratio));

  const std::vector<double> snr{0, 10, 20};
  const std::pair<std::size_t, std::size_t> dims[] = {{16, 16}, {32, 16}, {64, 16},
                                                      {32, 32}, {64, 32}, {64, 64}};
  const std::vector<SumRateStrategy> s{{PrecoderPath::Digital, Strategy::RZFBF, {}, {}},
                                       {PrecoderPath::MilacLmmse, Strategy::RZFBF, {}, {}}};
  std::map<std::pair<std::size_t, std::size_t>, CurveTable> tables;
  for (auto d : dims) tables[d] = run_sumrate_experiment(link(d.first, d.second, snr, 100, 8), s);
  auto rate = [&](const std::string& lbl, std::size_t nt, std::size_t nr, double x) {
    return tables.at({nt, nr}).find(lbl, x).mean;
  };
  bool trend = true;
  for (const auto& st : s) {
    const std::string lbl = st.label();
    for (double x : snr) {
      // more transmit antennas, fixed users
      for (std::size_t nr : {16u, 32u})
        for (std::size_t nt = nr; nt < 64; nt *= 2)
          trend = trend && rate(lbl, 2 * nt, nr, x) > rate(lbl, nt, nr, x);
      // more users, fixed transmit antennas
      for (std::size_t nr = 16; nr < 64; nr *= 2) trend = trend && rate(lbl, 64, 2 * nr, x) > rate(lbl, 64, nr, x);
    }
    for (auto d : dims)
      for (std::size_t i = 1; i < snr.size(); ++i)
        trend = trend && rate(lbl, d.first, d.second, snr[i]) > rate(lbl, d.first, d.second, snr[i - 1]);
    out.info(fmt("    %s at 20 dB: 16x16 %.1f, 32x32 %.1f, 64x64 %.1f bits/s/Hz", lbl.c_str(),
                 rate(lbl, 16, 16, 20), rate(lbl, 32, 32, 20), rate(lbl, 64, 64, 20)));
  }
  out.check(trend, "sum rate increases in N_T, N_R and SNR for both realizations (N <= 64)");
}

}  // namespace

int main() {
  criterion("AC1", "analog estimators equal digital closed forms", 60, ac1);
  criterion("AC2", "nodal and block-formula simulators agree", 60, ac2);
  criterion("AC3", "complexity headline numbers", 1, ac3);
  criterion("AC4", "4x4 multi-user sum rate", 300, ac4);
  criterion("AC5", "4x4 QPSK BER", 600, ac5);
  criterion("AC6", "analog DFT", 60, ac6);
  criterion("AC7", "Lloyd-Max quantizer and quantized networks", 600, ac7);
  criterion("AC8", "performance versus complexity", 600, ac8);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
