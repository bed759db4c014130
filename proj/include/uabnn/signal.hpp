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

// Synthetic single-channel gearbox vibration.
//
// A healthy gearbox is modelled as a sum of gear-mesh harmonics on a Gaussian
// floor. Faults add, per class, a subset of: a decaying structural resonance
// excited once per shaft revolution (tooth damage), amplitude modulation of
// the mesh tone at shaft frequency (eccentricity, cracked-tooth stiffness
// loss) and extra broadband noise (surface wear).

#ifndef UABNN_SIGNAL_HPP_
#define UABNN_SIGNAL_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace uabnn {

enum class FaultClass : int {
  kNoFault = 0,
  kMissingTooth = 1,
  kChippedTooth = 2,
  kRootCrack = 3,
  kSurfaceWear = 4,
  kEccentricity = 5,
};

inline constexpr int kFaultClassCount = 6;

inline constexpr std::array<FaultClass, kFaultClassCount> kAllFaultClasses = {
    FaultClass::kNoFault,     FaultClass::kMissingTooth, FaultClass::kChippedTooth,
    FaultClass::kRootCrack,   FaultClass::kSurfaceWear,  FaultClass::kEccentricity};

constexpr int fault_id(FaultClass f) noexcept { return static_cast<int>(f); }

// Identifier used on the command line and in dataset manifests ("NoFault").
std::string_view fault_key(FaultClass f) noexcept;
// Human-readable label ("No Fault").
std::string_view display_name(FaultClass f) noexcept;

FaultClass fault_from_id(int id);
// Accepts either the key or the display name. Throws ConfigError listing the
// valid names otherwise.
FaultClass parse_fault(std::string_view name);
std::string valid_fault_names();

struct SignalConfig {
  double sample_rate_hz = 5000.0;
  double duration_s = 1.0;
  double shaft_freq_hz = 20.0;
  double gear_mesh_freq_hz = 280.0;
  int n_harmonics = 3;
  std::vector<double> harmonic_amplitudes = {1.0, 0.5, 0.25};
  double base_noise_std = 0.05;
  std::uint64_t seed = 0;

  // Throws ConfigError on Nyquist violation, shape mismatch or non-finite
  // parameters.
  void validate() const;
  std::size_t sample_count() const;
};

struct FaultSignature {
  double impulse_amplitude = 0.0;
  double impulse_period_s = 0.05;
  double sideband_depth = 0.0;
  double broadband_gain = 0.0;
  // Shape of each impact response.
  double resonance_hz = 1500.0;
  double decay_s = 0.002;
};

FaultSignature default_signature(FaultClass fault, const SignalConfig& config);

struct Waveform {
  std::vector<double> samples;
  double sample_rate_hz = 0.0;

  std::size_t size() const noexcept { return samples.size(); }
  double power() const;
};

Waveform generate_vibration(const SignalConfig& config, FaultClass fault);
Waveform generate_vibration(const SignalConfig& config, FaultClass fault,
                            const FaultSignature& signature);

// std::nullopt means "no noise" and returns the input unchanged.
// Noise variance is P_signal / 10^(snr_db / 10), P = mean of squares; sample i
// of the noise depends only on (seed, i).
Waveform inject_noise(const Waveform& w, std::optional<double> snr_db, std::uint64_t seed);

// Single-column CSV with header "accel", written as
// <dir>/<FaultKey>_seed<seed>.csv. Returns the path.
std::filesystem::path write_waveform_csv(const Waveform& w, const std::filesystem::path& dir,
                                         FaultClass fault, std::uint64_t seed);

}  // namespace uabnn

#endif  // UABNN_SIGNAL_HPP_
