#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gifts/error.hpp"
#include "gifts/text.hpp"

namespace gifts {

/// Interleaved PCM samples in [-1, 1].
struct Waveform {
  int sample_rate = 16000;
  int channels = 1;
  std::vector<double> samples;

  std::size_t frames() const {
    return channels > 0 ? samples.size() / static_cast<std::size_t>(channels) : 0;
  }
  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(frames()) / sample_rate : 0.0;
  }
  double at(std::size_t frame, int channel) const {
    return samples[frame * static_cast<std::size_t>(channels) + static_cast<std::size_t>(channel)];
  }

  /// Mono mixdown (channel mean per frame).
  std::vector<double> mono() const {
    std::vector<double> out(frames(), 0.0);
    for (std::size_t f = 0; f < out.size(); ++f) {
      double acc = 0.0;
      for (int c = 0; c < channels; ++c) acc += at(f, c);
      out[f] = acc / channels;
    }
    return out;
  }

  bool operator==(const Waveform&) const = default;
};

inline double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  long double acc = 0.0;
  for (double v : x) acc += static_cast<long double>(v) * v;
  return static_cast<double>(std::sqrt(acc / static_cast<long double>(x.size())));
}

inline double peak(std::span<const double> x) {
  double p = 0.0;
  for (double v : x) p = std::max(p, std::abs(v));
  return p;
}

namespace wav_detail {

inline std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}
inline void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

}  // namespace wav_detail

/// Decodes a RIFF/WAVE file holding 16-bit integer PCM. Other encodings are rejected.
inline Waveform decode_wav(std::span<const std::uint8_t> bytes) {
  using namespace wav_detail;
  auto fail = [](const std::string& why) { return Error(ErrorCode::AudioDecodeError, why); };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw fail("not a RIFF/WAVE stream");
  }
  Waveform w;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw fail("truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw fail("short fmt chunk");
      const std::uint16_t format = le16(bytes.data() + body);
      w.channels = le16(bytes.data() + body + 2);
      w.sample_rate = static_cast<int>(le32(bytes.data() + body + 4));
      const std::uint16_t bits = le16(bytes.data() + body + 14);
      // 0xFFFE is WAVE_FORMAT_EXTENSIBLE; the sub-format is assumed PCM when bits == 16.
      if ((format != 1 && format != 0xFFFE) || bits != 16) {
        throw fail("only 16-bit integer PCM is supported");
      }
      if (w.channels < 1 || w.sample_rate < 1) throw fail("invalid channel count or rate");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw fail("data chunk before fmt chunk");
      const std::size_t count = size / 2;
      w.samples.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        const auto v = static_cast<std::int16_t>(le16(bytes.data() + body + 2 * i));
        w.samples[i] = v / 32768.0;
      }
      w.samples.resize(w.frames() * static_cast<std::size_t>(w.channels));
      return w;
    }
    pos = body + size + (size & 1u);
  }
  throw fail("no data chunk");
}

inline std::int16_t quantize_sample(double v) {
  const double clamped = std::clamp(v, -1.0, 1.0);
  const long q = std::lround(clamped * 32768.0);
  return static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L));
}

inline std::vector<std::uint8_t> encode_wav(const Waveform& w) {
  using namespace wav_detail;
  std::vector<std::uint8_t> out;
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(out, 16);
  put16(out, 1);
  put16(out, static_cast<std::uint16_t>(w.channels));
  put32(out, static_cast<std::uint32_t>(w.sample_rate));
  put32(out, static_cast<std::uint32_t>(w.sample_rate * w.channels * 2));
  put16(out, static_cast<std::uint16_t>(w.channels * 2));
  put16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(out, data_bytes);
  for (double v : w.samples) put16(out, static_cast<std::uint16_t>(quantize_sample(v)));
  return out;
}

inline Waveform read_wav(const std::filesystem::path& path) {
  return decode_wav(text::read_bytes(path));
}

inline void write_wav(const std::filesystem::path& path, const Waveform& w) {
  const auto bytes = encode_wav(w);
  text::write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

/// Round-trips samples through 16-bit quantization, i.e. what a written file will hold.
inline Waveform quantized(const Waveform& w) {
  Waveform q = w;
  for (double& v : q.samples) v = quantize_sample(v) / 32768.0;
  return q;
}

}  // namespace gifts
