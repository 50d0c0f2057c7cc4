#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "gifts/template.hpp"

namespace gifts::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("gifts_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline const prompt::TemplateCatalog& catalog() {
  static const prompt::TemplateCatalog kCatalog = prompt::TemplateCatalog::load(GIFTS_TEMPLATE_DIR);
  return kCatalog;
}

}  // namespace gifts::testing
