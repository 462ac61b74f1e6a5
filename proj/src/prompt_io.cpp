#include <fstream>
#include <sstream>

#include "json.hpp"

#include "rap/errors.hpp"
#include "rap/prompt.hpp"

namespace rap {
namespace {

using nlohmann::json;

json points_json(const std::vector<Pixel>& pts) {
  json a = json::array();
  for (const Pixel p : pts) a.push_back({p.x, p.y});
  return a;
}

std::vector<Pixel> points_from(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) throw FormatError(std::string("prompt JSON: '") + key + "' must be an array");
  std::vector<Pixel> out;
  for (const auto& p : j[key]) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer())
      throw FormatError(std::string("prompt JSON: '") + key + "' entries must be [x, y] integer pairs");
    out.push_back({p[0].get<int>(), p[1].get<int>()});
  }
  return out;
}

}  // namespace

std::string prompt_to_json(const PromptSet& prompts, const std::string& imagePath) {
  json j;
  j["image"] = imagePath;
  j["positives"] = points_json(prompts.positives);
  j["negatives"] = points_json(prompts.negatives);
  j["bbox"] = {prompts.bbox.x0, prompts.bbox.y0, prompts.bbox.x1, prompts.bbox.y1};
  return j.dump();
}

PromptSet prompt_from_json(const std::string& text, std::string* imagePath) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("prompt JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("prompt JSON must be an object");
  PromptSet ps;
  ps.positives = points_from(j, "positives");
  ps.negatives = points_from(j, "negatives");
  if (!j.contains("bbox") || !j["bbox"].is_array() || j["bbox"].size() != 4)
    throw FormatError("prompt JSON: 'bbox' must be [x0, y0, x1, y1]");
  for (const auto& v : j["bbox"])
    if (!v.is_number_integer()) throw FormatError("prompt JSON: bbox entries must be integers");
  ps.bbox = {j["bbox"][0].get<int>(), j["bbox"][1].get<int>(), j["bbox"][2].get<int>(), j["bbox"][3].get<int>()};
  if (imagePath) {
    if (!j.contains("image") || !j["image"].is_string()) throw FormatError("prompt JSON: 'image' must be a string");
    *imagePath = j["image"].get<std::string>();
  }
  return ps;
}

void write_prompt_file(const PromptSet& prompts, const std::string& imagePath, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << prompt_to_json(prompts, imagePath) << '\n';
}

PromptSet read_prompt_file(const std::filesystem::path& path, std::string* imagePath) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return prompt_from_json(ss.str(), imagePath);
}

}  // namespace rap
