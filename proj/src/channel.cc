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

#include "sehilo/channel.h"

#include <cmath>
#include <stdexcept>

namespace sehilo {

ChannelConfig ChannelConfig::SnrDb(double snr_db, uint64_t seed) {
  ChannelConfig cfg;
  cfg.mode = Mode::kSnrDb;
  cfg.snr_db = snr_db;
  cfg.seed = seed;
  cfg.Validate();
  return cfg;
}

ChannelConfig ChannelConfig::FixedSigma(double sigma, uint64_t seed) {
  ChannelConfig cfg;
  cfg.mode = Mode::kFixedSigma;
  cfg.fixed_sigma = sigma;
  cfg.seed = seed;
  cfg.Validate();
  return cfg;
}

void ChannelConfig::Validate() const {
  switch (mode) {
    case Mode::kSnrDb:
      if (!std::isfinite(snr_db)) {
        throw std::invalid_argument("ChannelConfig: snr_db must be finite");
      }
      break;
    case Mode::kFixedSigma:
      if (!std::isfinite(fixed_sigma) || fixed_sigma <= 0.0) {
        throw std::invalid_argument(
            "ChannelConfig: fixed_sigma must be finite and positive");
      }
      break;
  }
}

double SigmaFromSnr(double signal_power, double snr_db) {
  if (!std::isfinite(signal_power) || signal_power <= 0.0) {
    throw std::invalid_argument(
        "SigmaFromSnr: signal_power must be finite and positive");
  }
  if (!std::isfinite(snr_db)) {
    throw std::invalid_argument("SigmaFromSnr: snr_db must be finite");
  }
  return std::sqrt(signal_power * std::pow(10.0, -snr_db / 10.0));
}

double TransmitResult::MeasuredSnrDb() const {
  return 10.0 * std::log10(signal_power / noise_power);
}

TransmitResult Transmit(const std::vector<double>& payload,
                        const ChannelConfig& cfg, RngStream& rng) {
  cfg.Validate();
  if (payload.empty()) {
    throw std::invalid_argument("Transmit: payload must be non-empty");
  }

  double power = 0.0;
  for (double x : payload) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("Transmit: payload must be finite");
    }
    power += x * x;
  }
  power /= static_cast<double>(payload.size());

  TransmitResult result;
  result.signal_power = power;
  if (cfg.mode == ChannelConfig::Mode::kSnrDb) {
    if (power <= 0.0) {
      throw std::invalid_argument(
          "Transmit: SNR mode needs a payload with non-zero power");
    }
    result.sigma = SigmaFromSnr(power, cfg.snr_db);
  } else {
    result.sigma = cfg.fixed_sigma;
  }

  result.output.resize(payload.size());
  double noise_power = 0.0;
  for (size_t i = 0; i < payload.size(); ++i) {
    const double noise = result.sigma * rng.NextGaussian();
    result.output[i] = payload[i] + noise;
    noise_power += noise * noise;
  }
  result.noise_power = noise_power / static_cast<double>(payload.size());
  return result;
}

TransmitResult Transmit(const std::vector<double>& payload,
                        const ChannelConfig& cfg) {
  RngStream rng(cfg.seed);
  return Transmit(payload, cfg, rng);
}

}  // namespace sehilo
