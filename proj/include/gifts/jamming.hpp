#pragma once

// Phoneme-noise jamming: noise spliced from the speaker's own voiced segments, optionally
// blended with white noise, mixed into the clip at a requested SNR.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gifts/error.hpp"
#include "gifts/json_io.hpp"
#include "gifts/random.hpp"
#include "gifts/wav.hpp"

namespace gifts::jam {

struct JamParams {
  double snr_db = 10.0;
  double white_ratio = 0.0;
  int segment_ms = 100;
  std::uint64_t seed = 0;

  void validate() const {
    if (!std::isfinite(snr_db)) throw Error(ErrorCode::InvalidArgument, "snr_db must be finite");
    if (!(white_ratio >= 0.0 && white_ratio <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "white_ratio must lie in [0, 1]");
    }
    if (segment_ms < 20) throw Error(ErrorCode::InvalidArgument, "segment_ms must be at least 20");
  }
};

inline constexpr double kCrossfadeMs = 5.0;
inline constexpr double kVoicedFloorRms = 1e-3;     // about -60 dBFS
inline constexpr double kVoicedRelativeRms = 0.1;   // fraction of the loudest segment

/// Start offsets (in frames) of voiced segments of `len` frames in a mono signal.
inline std::vector<std::size_t> voiced_segments(const std::vector<double>& mono, std::size_t len) {
  std::vector<std::size_t> starts;
  std::vector<double> energy;
  if (mono.size() < len) {
    if (!mono.empty()) {
      starts.push_back(0);
      energy.push_back(rms(mono));
    }
  } else {
    for (std::size_t s = 0; s + len <= mono.size(); s += len) {
      starts.push_back(s);
      energy.push_back(rms(std::span<const double>(mono.data() + s, len)));
    }
  }
  double loudest = 0.0;
  for (double e : energy) loudest = std::max(loudest, e);
  const double threshold = std::max(kVoicedFloorRms, kVoicedRelativeRms * loudest);
  std::vector<std::size_t> voiced;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (energy[i] >= threshold) voiced.push_back(starts[i]);
  }
  return voiced;
}

inline std::size_t frames_for_ms(int sample_rate, double ms) {
  return static_cast<std::size_t>(std::llround(sample_rate * ms / 1000.0));
}

/// Mono noise of exactly `voice.frames()` frames, returned with the input's channel count
/// (each channel carries the same realization).
inline Waveform synthesize_phoneme_noise(const Waveform& voice, const JamParams& params) {
  params.validate();
  const std::vector<double> mono = voice.mono();
  const std::size_t seg_len = std::max<std::size_t>(1, frames_for_ms(voice.sample_rate, params.segment_ms));
  const auto voiced = voiced_segments(mono, seg_len);
  if (voiced.empty()) throw Error(ErrorCode::NoVoicedContent, "no voiced segment above the energy threshold");

  const std::size_t n = mono.size();
  const std::size_t piece = std::min(seg_len, n);
  const std::size_t fade = std::min(frames_for_ms(voice.sample_rate, kCrossfadeMs), piece / 2);
  SeededRng rng(derive_seed(params.seed, "phoneme"));
  std::vector<double> out;
  out.reserve(n + piece);
  while (out.size() < n) {
    const std::size_t start = voiced[rng.below(voiced.size())];
    const double* seg = mono.data() + start;
    std::size_t k = 0;
    if (!out.empty() && fade > 0) {
      const std::size_t base = out.size() - fade;
      for (; k < fade; ++k) {
        const double w = static_cast<double>(k + 1) / static_cast<double>(fade + 1);
        out[base + k] = out[base + k] * (1.0 - w) + seg[k] * w;
      }
    }
    for (; k < piece; ++k) out.push_back(seg[k]);
  }
  out.resize(n);

  Waveform w;
  w.sample_rate = voice.sample_rate;
  w.channels = voice.channels;
  w.samples.resize(voice.samples.size());
  for (std::size_t f = 0; f < n; ++f) {
    for (int c = 0; c < voice.channels; ++c) w.samples[f * voice.channels + c] = out[f];
  }
  return w;
}

/// Unit-variance gaussian noise shaped like `like`, one realization shared across channels.
inline Waveform white_noise(const Waveform& like, std::uint64_t seed) {
  SeededRng rng(derive_seed(seed, "white"));
  Waveform w;
  w.sample_rate = like.sample_rate;
  w.channels = like.channels;
  w.samples.resize(like.samples.size());
  for (std::size_t f = 0; f < like.frames(); ++f) {
    const double v = rng.gaussian();
    for (int c = 0; c < like.channels; ++c) w.samples[f * like.channels + c] = v;
  }
  return w;
}

struct MixResult {
  Waveform mixed;
  double noise_gain = 0.0;  // k applied to the noise
  bool peak_rescaled = false;
  double rescale = 1.0;     // factor applied to the whole mix
};

/// clean + k * noise with k = rms(clean) / (rms(noise) * 10^(snr/20)); a mix leaving [-1, 1]
/// is scaled down by its peak.
inline MixResult mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db) {
  if (clean.sample_rate != noise.sample_rate || clean.channels != noise.channels ||
      clean.samples.size() != noise.samples.size()) {
    throw Error(ErrorCode::DurationMismatch, "clean and noise differ in rate, channels, or length");
  }
  const double rc = rms(clean.samples);
  const double rn = rms(noise.samples);
  if (rc == 0.0) throw Error(ErrorCode::ZeroSignal, "clean signal is all zero");
  if (rn == 0.0) throw Error(ErrorCode::ZeroNoise, "noise is all zero");
  MixResult r;
  r.noise_gain = rc / (rn * std::pow(10.0, snr_db / 20.0));
  r.mixed = clean;
  for (std::size_t i = 0; i < clean.samples.size(); ++i) r.mixed.samples[i] += r.noise_gain * noise.samples[i];
  const double p = peak(r.mixed.samples);
  if (p > 1.0) {
    r.peak_rescaled = true;
    r.rescale = 1.0 / p;
    for (double& v : r.mixed.samples) v *= r.rescale;
  }
  return r;
}

/// 20 log10(rms(clean) / rms(mixed - clean)).
inline double measured_snr_db(const Waveform& clean, const Waveform& mixed) {
  std::vector<double> diff(clean.samples.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = mixed.samples[i] - clean.samples[i];
  return 20.0 * std::log10(rms(clean.samples) / rms(diff));
}

struct ProtectResult {
  Waveform output;  // as written, after 16-bit quantization
  double achieved_snr_db = 0.0;
  bool peak_rescaled = false;
  std::vector<std::string> warnings;
};

/// Jamming noise for one clip: sqrt(1-w) * phoneme + sqrt(w) * white, normalized to unit rms.
inline Waveform jamming_noise(const Waveform& voice, const JamParams& params, std::vector<std::string>& warnings) {
  auto unit = [](Waveform w) {
    const double r = rms(w.samples);
    if (r > 0.0) {
      for (double& v : w.samples) v /= r;
    }
    return w;
  };
  const Waveform white = unit(white_noise(voice, params.seed));
  if (params.white_ratio >= 1.0) return white;
  Waveform pn;
  try {
    pn = unit(synthesize_phoneme_noise(voice, params));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoVoicedContent) throw;
    warnings.push_back("no voiced content; injected white noise only");
    return white;
  }
  if (params.white_ratio <= 0.0) return pn;
  Waveform mix = pn;
  const double a = std::sqrt(1.0 - params.white_ratio);
  const double b = std::sqrt(params.white_ratio);
  for (std::size_t i = 0; i < mix.samples.size(); ++i) mix.samples[i] = a * pn.samples[i] + b * white.samples[i];
  return unit(std::move(mix));
}

inline ProtectResult protect_waveform(const Waveform& clean, const JamParams& params) {
  params.validate();
  ProtectResult r;
  const Waveform noise = jamming_noise(clean, params, r.warnings);
  MixResult m = mix_at_snr(clean, noise, params.snr_db);
  r.peak_rescaled = m.peak_rescaled;
  r.output = quantized(m.mixed);
  if (r.peak_rescaled) r.warnings.push_back("mix exceeded full scale; rescaled by peak");
  r.achieved_snr_db = measured_snr_db(clean, r.output);
  return r;
}

inline json_io::Json sidecar_json(const std::string& source, const JamParams& params, const ProtectResult& r) {
  json_io::Json j;
  j["source"] = source;
  j["snr_db"] = params.snr_db;
  j["white_ratio"] = params.white_ratio;
  j["segment_ms"] = params.segment_ms;
  j["seed"] = params.seed;
  j["achieved_snr_db"] = r.achieved_snr_db;
  j["peak_rescaled"] = r.peak_rescaled;
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  return j;
}

/// Reads `input`, writes the protected clip to `output` and its sidecar to `output` + ".json".
inline ProtectResult protect_clip(const std::filesystem::path& input, const std::filesystem::path& output,
                                  const JamParams& params) {
  const Waveform clean = read_wav(input);
  ProtectResult r = protect_waveform(clean, params);
  write_wav(output, r.output);
  std::filesystem::path sidecar = output;
  sidecar += ".json";
  text::write_file(sidecar, json_io::dump_document(sidecar_json(input.string(), params, r)));
  return r;
}

}  // namespace gifts::jam
