#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gifts/json_io.hpp"
#include "gifts/types.hpp"
#include "gifts/wav.hpp"

namespace gifts {

struct LoadedManifest {
  Dataset dataset;
  std::filesystem::path path;
  std::vector<std::string> warnings;
};

/// Clips longer than this get a load warning; several audio backends truncate long input.
inline constexpr double kLongClipSeconds = 30.0;

/// Parses a manifest document. Relative audio paths are resolved against `base_dir`; when
/// `check_audio` is set each path must name a readable file.
inline LoadedManifest parse_manifest(const std::string& document,
                                     const std::filesystem::path& base_dir, bool check_audio,
                                     const std::filesystem::path& origin = {}) {
  json_io::Json j;
  try {
    j = json_io::Json::parse(document);
  } catch (const json_io::Json::parse_error& e) {
    throw Error(ErrorCode::ManifestError, std::string("malformed JSON: ") + e.what());
  }
  LoadedManifest out{json_io::dataset_from_json(j), origin, {}};
  for (auto& ind : out.dataset.individuals) {
    for (auto& clip : ind.clips) {
      std::filesystem::path p(clip.audio_path);
      if (p.is_relative() && !base_dir.empty()) p = (base_dir / p).lexically_normal();
      clip.audio_path = p.string();
      if (!check_audio) continue;
      std::ifstream probe(p, std::ios::binary);
      if (!probe) {
        throw Error(ErrorCode::ManifestError, "individual '" + ind.individual_id + "' clip '" +
                                                  clip.clip_id + "': audio file '" +
                                                  p.string() + "' is not readable");
      }
      try {
        const Waveform w = read_wav(p);
        if (w.duration_seconds() > kLongClipSeconds) {
          out.warnings.push_back("clip '" + clip.clip_id + "' of '" + ind.individual_id +
                                 "' lasts " + std::to_string(w.duration_seconds()) +
                                 " s; long audio may be truncated by some backends");
        }
      } catch (const Error& e) {
        out.warnings.push_back("clip '" + clip.clip_id + "' of '" + ind.individual_id +
                               "' could not be decoded at load: " + e.what());
      }
    }
  }
  return out;
}

inline LoadedManifest load_manifest(const std::filesystem::path& path, bool check_audio = true) {
  return parse_manifest(text::read_file(path), path.parent_path(), check_audio, path);
}

inline void save_manifest(const std::filesystem::path& path, const Dataset& d) {
  text::write_file(path, json_io::dump_document(json_io::to_json(d)));
}

}  // namespace gifts
