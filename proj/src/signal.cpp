/* Copyright 2026 The uabnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "uabnn/signal.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "text.hpp"
#include "uabnn/error.hpp"
#include "uabnn/rng.hpp"

namespace uabnn {

namespace {

constexpr std::array<std::string_view, kFaultClassCount> kKeys = {
    "NoFault", "MissingTooth", "ChippedTooth", "RootCrack", "SurfaceWear", "Eccentricity"};

constexpr std::array<std::string_view, kFaultClassCount> kDisplay = {
    "No Fault", "Missing Tooth", "Chipped Tooth", "Root Crack", "Surface Wear", "Eccentricity"};

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw ConfigError(std::string(name) + " must be finite");
}

}  // namespace

std::string_view fault_key(FaultClass f) noexcept { return kKeys[fault_id(f)]; }

std::string_view display_name(FaultClass f) noexcept { return kDisplay[fault_id(f)]; }

FaultClass fault_from_id(int id) {
  if (id < 0 || id >= kFaultClassCount)
    throw ConfigError("fault id " + std::to_string(id) + " out of range [0, 6)");
  return static_cast<FaultClass>(id);
}

std::string valid_fault_names() {
  std::string out;
  for (auto k : kKeys) {
    if (!out.empty()) out += ", ";
    out += k;
  }
  return out;
}

FaultClass parse_fault(std::string_view name) {
  for (int i = 0; i < kFaultClassCount; ++i) {
    if (name == kKeys[i] || name == kDisplay[i]) return static_cast<FaultClass>(i);
  }
  throw ConfigError("unknown fault '" + std::string(name) + "'; valid names: " +
                    valid_fault_names());
}

void SignalConfig::validate() const {
  require_finite(sample_rate_hz, "sample_rate_hz");
  require_finite(duration_s, "duration_s");
  require_finite(shaft_freq_hz, "shaft_freq_hz");
  require_finite(gear_mesh_freq_hz, "gear_mesh_freq_hz");
  require_finite(base_noise_std, "base_noise_std");
  if (sample_rate_hz <= 0) throw ConfigError("sample_rate_hz must be positive");
  if (duration_s <= 0) throw ConfigError("duration_s must be positive");
  if (shaft_freq_hz <= 0) throw ConfigError("shaft_freq_hz must be positive");
  if (gear_mesh_freq_hz <= 0) throw ConfigError("gear_mesh_freq_hz must be positive");
  if (n_harmonics <= 0) throw ConfigError("n_harmonics must be positive");
  if (base_noise_std < 0) throw ConfigError("base_noise_std must be non-negative");
  if (harmonic_amplitudes.size() != static_cast<std::size_t>(n_harmonics))
    throw ConfigError("harmonic_amplitudes has " + std::to_string(harmonic_amplitudes.size()) +
                      " entries, expected n_harmonics = " + std::to_string(n_harmonics));
  for (double a : harmonic_amplitudes) {
    require_finite(a, "harmonic_amplitudes");
    if (a < 0) throw ConfigError("harmonic_amplitudes must be non-negative");
  }
  if (gear_mesh_freq_hz * n_harmonics >= sample_rate_hz / 2) {
    std::ostringstream ss;
    ss << "highest mesh harmonic " << gear_mesh_freq_hz * n_harmonics
       << " Hz is at or above the Nyquist frequency " << sample_rate_hz / 2 << " Hz";
    throw ConfigError(ss.str());
  }
  if (sample_count() == 0) throw ConfigError("duration_s * sample_rate_hz rounds to zero samples");
}

std::size_t SignalConfig::sample_count() const {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
}

FaultSignature default_signature(FaultClass fault, const SignalConfig& config) {
  FaultSignature s;
  s.impulse_period_s = 1.0 / config.shaft_freq_hz;
  switch (fault) {
    case FaultClass::kNoFault:
      break;
    case FaultClass::kMissingTooth:
      s.impulse_amplitude = 2.5;
      break;
    case FaultClass::kChippedTooth:
      s.impulse_amplitude = 1.0;
      break;
    case FaultClass::kRootCrack:
      // A cracked root rings a stiffer, higher mode than a chipped face.
      s.impulse_amplitude = 0.8;
      s.resonance_hz = 2200.0;
      s.decay_s = 0.003;
      break;
    case FaultClass::kSurfaceWear:
      s.broadband_gain = 0.5;
      break;
    case FaultClass::kEccentricity:
      s.sideband_depth = 0.8;
      break;
  }
  return s;
}

double Waveform::power() const {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (double v : samples) acc += v * v;
  return acc / static_cast<double>(samples.size());
}

Waveform generate_vibration(const SignalConfig& config, FaultClass fault) {
  config.validate();
  return generate_vibration(config, fault, default_signature(fault, config));
}

Waveform generate_vibration(const SignalConfig& config, FaultClass /*fault*/,
                            const FaultSignature& sig) {
  config.validate();
  for (double v : {sig.impulse_amplitude, sig.impulse_period_s, sig.sideband_depth,
                   sig.broadband_gain, sig.resonance_hz, sig.decay_s})
    require_finite(v, "fault signature parameter");
  if (sig.impulse_amplitude < 0 || sig.broadband_gain < 0)
    throw ConfigError("fault signature amplitudes must be non-negative");
  if (sig.impulse_period_s <= 0 || sig.decay_s <= 0)
    throw ConfigError("fault signature periods must be positive");
  if (sig.sideband_depth < 0 || sig.sideband_depth > 1)
    throw ConfigError("sideband_depth must lie in [0, 1]");

  const std::size_t n = config.sample_count();
  const double fs = config.sample_rate_hz;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;

  const CounterRng floor_rng(derive_seed(config.seed, "floor"));
  const CounterRng broadband_rng(derive_seed(config.seed, "broadband"));
  const CounterRng impulse_rng(derive_seed(config.seed, "impulse"));
  // First impact lands somewhere within the first revolution.
  const double first_impact_s = impulse_rng.uniform(0) * sig.impulse_period_s;
  // Impact responses are truncated after exp(-30).
  const double ring_s = 30.0 * sig.decay_s;

  Waveform w;
  w.sample_rate_hz = fs;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    double mesh = 0.0;
    for (int h = 0; h < config.n_harmonics; ++h) {
      mesh += config.harmonic_amplitudes[h] *
              std::sin(kTwoPi * (h + 1) * config.gear_mesh_freq_hz * t);
    }
    double v = mesh;
    if (sig.sideband_depth > 0) {
      v *= 1.0 + sig.sideband_depth * std::cos(kTwoPi * config.shaft_freq_hz * t);
    }
    if (sig.impulse_amplitude > 0 && t >= first_impact_s) {
      auto k = static_cast<long long>(std::floor((t - first_impact_s) / sig.impulse_period_s));
      for (; k >= 0; --k) {
        const double dt = t - (first_impact_s + static_cast<double>(k) * sig.impulse_period_s);
        if (dt > ring_s) break;
        v += sig.impulse_amplitude * std::exp(-dt / sig.decay_s) *
             std::sin(kTwoPi * sig.resonance_hz * dt);
      }
    }
    if (sig.broadband_gain > 0) v += sig.broadband_gain * broadband_rng.normal(i);
    if (config.base_noise_std > 0) v += config.base_noise_std * floor_rng.normal(i);
    w.samples[i] = v;
  }
  return w;
}

Waveform inject_noise(const Waveform& w, std::optional<double> snr_db, std::uint64_t seed) {
  if (!snr_db) return w;
  if (!std::isfinite(*snr_db)) throw ConfigError("snr_db must be finite; use no-noise instead");
  if (w.samples.empty()) throw DegenerateInputError("cannot add noise to an empty waveform");
  const double p_signal = w.power();
  if (!(p_signal > 0)) throw DegenerateInputError("cannot add noise at a given SNR to a zero-power waveform");
  const double noise_std = std::sqrt(p_signal / std::pow(10.0, *snr_db / 10.0));
  const CounterRng rng(derive_seed(seed, "noise"));
  Waveform out = w;
  for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += noise_std * rng.normal(i);
  return out;
}

std::filesystem::path write_waveform_csv(const Waveform& w, const std::filesystem::path& dir,
                                         FaultClass fault, std::uint64_t seed) {
  auto path = dir / (std::string(fault_key(fault)) + "_seed" + std::to_string(seed) + ".csv");
  std::string body = "accel\n";
  body.reserve(w.samples.size() * 20);
  for (double v : w.samples) {
    body += detail::format_double(v);
    body += '\n';
  }
  detail::write_file(path, body);
  return path;
}

}  // namespace uabnn
