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

// Builds an analog R-ZFBF precoder for a random 4x4 channel, checks it
// against the digital formula and prints the sum rate of both.

#include <cstdio>

#include "milac/milac.hpp"

int main() {
  using namespace milac;

  RngStream rng(/*seed=*/42);
  const ComplexMatrix h = rayleigh_channel(4, 4, rng);

  const double snr_db = 10.0;
  const double sigma2 = std::pow(10.0, -snr_db / 10.0);
  const double lambda = optimal_lambda(4, sigma2, 1.0);

  // Network that computes H^H (H H^H + lambda I)^-1, scaled to ||W||_F^2 = 4.
  const BeamformerSpec spec{Strategy::RZFBF, Side::Transmitter, lambda,
                            Normalization::FrobeniusGlobal, std::nullopt};
  const MilacNetwork net = lmmse_inspired_network(spec, h, kDefaultY0);
  const ComplexMatrix w_analog = transfer_matrix(net);
  const ComplexMatrix w_digital =
      precoder_digital(Strategy::RZFBF, h, lambda, Normalization::FrobeniusGlobal);

  std::printf("ports: %zu driven, %zu output\n", net.n_in(), net.m_out());
  std::printf("analog vs digital relative error: %.3e\n", relative_error(w_analog, w_digital));
  std::printf("sum rate, analog:  %.4f bits/s/Hz\n", sum_rate(h, w_analog, 1.0, sigma2));

  const ComplexMatrix w_column =
      precoder_digital(Strategy::RZFBF, h, lambda, Normalization::PerColumn);
  std::printf("sum rate, digital (per-user power): %.4f bits/s/Hz\n",
              sum_rate(h, w_column, 1.0, sigma2));

  const Gain g = gain(Task::ZeroForcing, 8192, 100);
  std::printf("ZF complexity gain at 8192 antennas: %s\n", g.rounded().c_str());
}
