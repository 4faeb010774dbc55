#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pathlight {

struct LightSetting {
  int red = 255;
  int green = 255;
  int blue = 255;
  int intensity = 100;  // percent
  bool operator==(const LightSetting&) const = default;
};

bool valid_setting(const LightSetting& s);

struct ResidentProfile {
  std::string person_id;
  std::string display_name;
  std::string identity_token;
  LightSetting lighting;
  bool operator==(const ResidentProfile&) const = default;
};

class ProfileError : public std::runtime_error {
 public:
  enum class Kind { Malformed, DuplicateId };
  ProfileError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// JSON document {"profiles": [...]}, every field required, nothing extra.
std::vector<ResidentProfile> parse_profiles(std::string_view text);
std::string format_profiles(std::span<const ResidentProfile> profiles);

std::vector<ResidentProfile> profile_store_load(const std::string& path);
void profile_store_save(const std::string& path, std::span<const ResidentProfile> profiles);

const ResidentProfile* find_profile(std::span<const ResidentProfile> profiles, std::string_view id);

}  // namespace pathlight
