#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include "nuhf/detail/text_util.hpp"
#include "nuhf/error.hpp"
#include "nuhf/scenario.hpp"

namespace testing {

inline const std::filesystem::path kFixtures{NUHF_FIXTURES_DIR};
inline const std::filesystem::path kShutdown = kFixtures / "shutdown";
inline const std::filesystem::path kCorpus = kFixtures / "telemetry";

inline std::string fixture_text(const std::filesystem::path& relative) {
  return nuhf::detail::read_file(kFixtures / relative);
}

inline std::shared_ptr<const nuhf::Scenario> shutdown_scenario() {
  static const auto scenario =
      std::make_shared<const nuhf::Scenario>(nuhf::load_scenario(kShutdown / "scenario.json", kShutdown));
  return scenario;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& stem) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / (stem + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

template <typename Fn>
nuhf::ErrorCode error_of(Fn&& fn) {
  try {
    fn();
  } catch (const nuhf::Error& ex) {
    return ex.code();
  }
  throw std::runtime_error("expected an nuhf::Error");
}

}  // namespace testing
