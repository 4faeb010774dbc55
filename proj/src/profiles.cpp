#include "pathlight/profiles.hpp"

#include <set>

#include "json.hpp"
#include "pathlight/fileio.hpp"

namespace pathlight {

namespace {

using Json = nlohmann::ordered_json;

ProfileError malformed(const std::string& what) { return ProfileError(ProfileError::Kind::Malformed, what); }

void require_keys(const Json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw malformed(where + " must be an object");
  if (obj.size() != keys.size()) throw malformed(where + " has unexpected fields");
  for (const char* k : keys)
    if (!obj.contains(k)) throw malformed(where + " lacks \"" + k + "\"");
}

std::string string_field(const Json& obj, const char* key, const std::string& where) {
  const Json& v = obj.at(key);
  if (!v.is_string()) throw malformed(where + "." + key + " must be a string");
  return v.get<std::string>();
}

int int_field(const Json& obj, const char* key, int lo, int hi, const std::string& where) {
  const Json& v = obj.at(key);
  if (!v.is_number_integer()) throw malformed(where + "." + key + " must be an integer");
  const long long x = v.get<long long>();
  if (x < lo || x > hi) throw malformed(where + "." + key + " out of range");
  return static_cast<int>(x);
}

// Ids appear in CSV event logs, so they must be plain tokens.
bool token_safe(const std::string& s) {
  if (s.empty()) return false;
  for (unsigned char c : s)
    if (c <= ' ' || c >= 0x7f || c == ',') return false;
  return true;
}

}  // namespace

bool valid_setting(const LightSetting& s) {
  auto channel = [](int v) { return v >= 0 && v <= 255; };
  return channel(s.red) && channel(s.green) && channel(s.blue) && s.intensity >= 0 && s.intensity <= 100;
}

std::vector<ResidentProfile> parse_profiles(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw malformed(std::string("invalid JSON: ") + e.what());
  }
  require_keys(doc, {"profiles"}, "document");
  if (!doc["profiles"].is_array()) throw malformed("profiles must be an array");

  std::vector<ResidentProfile> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc["profiles"].size(); ++i) {
    const Json& p = doc["profiles"][i];
    const std::string where = "profiles[" + std::to_string(i) + "]";
    require_keys(p, {"person_id", "display_name", "identity_token", "lighting"}, where);
    ResidentProfile r;
    r.person_id = string_field(p, "person_id", where);
    if (!token_safe(r.person_id)) throw malformed(where + ".person_id must be a non-empty token");
    r.display_name = string_field(p, "display_name", where);
    r.identity_token = string_field(p, "identity_token", where);
    const Json& l = p["lighting"];
    require_keys(l, {"red", "green", "blue", "intensity"}, where + ".lighting");
    r.lighting.red = int_field(l, "red", 0, 255, where);
    r.lighting.green = int_field(l, "green", 0, 255, where);
    r.lighting.blue = int_field(l, "blue", 0, 255, where);
    r.lighting.intensity = int_field(l, "intensity", 0, 100, where);
    if (!seen.insert(r.person_id).second)
      throw ProfileError(ProfileError::Kind::DuplicateId, "duplicate person_id " + r.person_id);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_profiles(std::span<const ResidentProfile> profiles) {
  Json arr = Json::array();
  std::set<std::string> seen;
  for (const ResidentProfile& r : profiles) {
    if (!seen.insert(r.person_id).second)
      throw ProfileError(ProfileError::Kind::DuplicateId, "duplicate person_id " + r.person_id);
    if (!token_safe(r.person_id) || !valid_setting(r.lighting))
      throw malformed("invalid profile " + r.person_id);
    Json p;
    p["person_id"] = r.person_id;
    p["display_name"] = r.display_name;
    p["identity_token"] = r.identity_token;
    p["lighting"] = {{"red", r.lighting.red},
                     {"green", r.lighting.green},
                     {"blue", r.lighting.blue},
                     {"intensity", r.lighting.intensity}};
    arr.push_back(std::move(p));
  }
  Json doc;
  doc["profiles"] = std::move(arr);
  return doc.dump(2) + "\n";
}

std::vector<ResidentProfile> profile_store_load(const std::string& path) { return parse_profiles(read_file(path)); }

void profile_store_save(const std::string& path, std::span<const ResidentProfile> profiles) {
  write_file_atomic(path, format_profiles(profiles));
}

const ResidentProfile* find_profile(std::span<const ResidentProfile> profiles, std::string_view id) {
  for (const ResidentProfile& r : profiles)
    if (r.person_id == id) return &r;
  return nullptr;
}

}  // namespace pathlight
