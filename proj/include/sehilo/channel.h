// Copyright 2026 The sehilo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEHILO_CHANNEL_H_
#define SEHILO_CHANNEL_H_

#include <cstdint>
#include <vector>

#include "sehilo/rng.h"

namespace sehilo {

// Additive white Gaussian noise channel. The noise level is set either
// directly (fixed sigma) or from a target SNR in dB, in which case sigma is
// derived from the empirical power of each payload passed to Transmit.
struct ChannelConfig {
  enum class Mode { kSnrDb, kFixedSigma };

  Mode mode = Mode::kFixedSigma;
  double snr_db = 0.0;
  double fixed_sigma = 0.0;
  uint64_t seed = 0;

  static ChannelConfig SnrDb(double snr_db, uint64_t seed);
  static ChannelConfig FixedSigma(double sigma, uint64_t seed);
  void Validate() const;
};

// sigma = sqrt(power * 10^(-snr_db / 10)) for mean-square signal power.
double SigmaFromSnr(double signal_power, double snr_db);

struct TransmitResult {
  std::vector<double> output;
  double sigma = 0.0;
  double signal_power = 0.0;  // empirical mean square of the payload
  double noise_power = 0.0;   // empirical mean square of the drawn noise

  // 10 * log10(signal_power / noise_power) over the realized samples.
  double MeasuredSnrDb() const;
};

// Adds one Gaussian draw per payload element using the caller's stream, so
// consecutive calls on one stream see independent noise.
TransmitResult Transmit(const std::vector<double>& payload,
                        const ChannelConfig& cfg, RngStream& rng);

// Convenience overload owning a stream seeded from cfg.seed.
TransmitResult Transmit(const std::vector<double>& payload,
                        const ChannelConfig& cfg);

}  // namespace sehilo

#endif  // SEHILO_CHANNEL_H_
