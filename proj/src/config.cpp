#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "rap/errors.hpp"
#include "rap/pipeline.hpp"

namespace rap {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) throw ConfigError(key + ": not a number: '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) throw ConfigError(key + ": not an integer: '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": not a flag: '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string fmt(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

using Setter = std::function<void(PipelineConfig&, const std::string& key, const std::string& value)>;

int as_int(const std::string& k, const std::string& v) { return static_cast<int>(to_int(k, v)); }

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"retrieval.rank", [](auto& c, auto& k, auto& v) { c.retrievalRank = as_int(k, v); }},
      {"retrieval.masked_descriptor", [](auto& c, auto& k, auto& v) { c.useMaskedDescriptor = to_bool(k, v); }},
      {"style.enable", [](auto& c, auto& k, auto& v) { c.enableStyleAdapt = to_bool(k, v); }},
      {"gating.k", [](auto& c, auto& k, auto& v) { c.gating.K = as_int(k, v); }},
      {"gating.k_prime", [](auto& c, auto& k, auto& v) { c.gating.KPrime = as_int(k, v); }},
      {"gating.quantile", [](auto& c, auto& k, auto& v) { c.gating.quantile = to_double(k, v); }},
      {"edge.scales", [](auto& c, auto& k, auto& v) { c.edge.scales = to_list(k, v); }},
      {"edge.w_log", [](auto& c, auto& k, auto& v) { c.edge.wLog = to_double(k, v); }},
      {"edge.w_grad", [](auto& c, auto& k, auto& v) { c.edge.wGrad = to_double(k, v); }},
      {"edge.keep_fraction", [](auto& c, auto& k, auto& v) { c.edge.keepFraction = to_double(k, v); }},
      {"chamfer.bins", [](auto& c, auto& k, auto& v) { c.binCount = as_int(k, v); }},
      {"chamfer.template_points", [](auto& c, auto& k, auto& v) { c.templatePointCount = as_int(k, v); }},
      {"chamfer.scales", [](auto& c, auto& k, auto& v) { c.search.scales = to_list(k, v); }},
      {"chamfer.rotations", [](auto& c, auto& k, auto& v) { c.search.rotations = to_list(k, v); }},
      {"chamfer.coarse_stride", [](auto& c, auto& k, auto& v) { c.search.coarseStride = as_int(k, v); }},
      {"chamfer.fine_radius", [](auto& c, auto& k, auto& v) { c.search.fineRadius = as_int(k, v); }},
      {"prompt.nv", [](auto& c, auto& k, auto& v) { c.prompt.Nv = as_int(k, v); }},
      {"prompt.ns", [](auto& c, auto& k, auto& v) { c.prompt.Ns = as_int(k, v); }},
      {"prompt.band_min", [](auto& c, auto& k, auto& v) { c.prompt.bandMin = to_double(k, v); }},
      {"prompt.band_max", [](auto& c, auto& k, auto& v) { c.prompt.bandMax = to_double(k, v); }},
      {"prompt.margin", [](auto& c, auto& k, auto& v) { c.prompt.margin = as_int(k, v); }},
      {"segment.edges", [](auto& c, auto& k, auto& v) {
         if (v == "gradient") c.segmenterEdges = SegmenterEdges::Gradient;
         else if (v == "combined") c.segmenterEdges = SegmenterEdges::Combined;
         else throw ConfigError(k + ": expected gradient or combined, got '" + v + "'");
       }},
      {"ablation.ocm", [](auto& c, auto& k, auto& v) { c.ablation.ocm = to_bool(k, v); }},
      {"ablation.sg", [](auto& c, auto& k, auto& v) { c.ablation.sg = to_bool(k, v); }},
      {"ablation.vp", [](auto& c, auto& k, auto& v) { c.ablation.vp = to_bool(k, v); }},
      {"seed", [](auto& c, auto& k, auto& v) {
         const long long s = to_int(k, v);
         if (s < 0) throw ConfigError("seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
  };
  return table;
}

}  // namespace

void PipelineConfig::validate() const {
  if (retrievalRank < 1) throw ConfigError("retrieval.rank must be >= 1");
  if (binCount < 1) throw ConfigError("chamfer.bins must be >= 1");
  if (templatePointCount < 8) throw ConfigError("chamfer.template_points must be >= 8");
  if (edge.scales.empty()) throw ConfigError("edge.scales is empty");
  for (double s : edge.scales)
    if (!(s > 0.0)) throw ConfigError("edge.scales must be positive");
  if (edge.wLog < 0.0 || edge.wGrad < 0.0 || edge.wLog + edge.wGrad <= 0.0)
    throw ConfigError("edge weights must be non-negative and not both zero");
  if (!(edge.keepFraction > 0.0 && edge.keepFraction < 1.0)) throw ConfigError("edge.keep_fraction must be in (0, 1)");
  gating.validate();
  search.validate();
  prompt.validate();
}

PipelineConfig parse_config(const std::string& text, PipelineConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineNo) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("line " + std::to_string(lineNo) + ": unknown key '" + key + "'");
    it->second(base, key, value);
  }
  base.validate();
  return base;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const PipelineConfig& c) {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  std::ostringstream os;
  os << "retrieval.rank = " << c.retrievalRank << '\n'
     << "retrieval.masked_descriptor = " << b(c.useMaskedDescriptor) << '\n'
     << "style.enable = " << b(c.enableStyleAdapt) << '\n'
     << "gating.k = " << c.gating.K << '\n'
     << "gating.k_prime = " << c.gating.KPrime << '\n'
     << "gating.quantile = " << fmt(c.gating.quantile) << '\n'
     << "edge.scales = " << fmt(c.edge.scales) << '\n'
     << "edge.w_log = " << fmt(c.edge.wLog) << '\n'
     << "edge.w_grad = " << fmt(c.edge.wGrad) << '\n'
     << "edge.keep_fraction = " << fmt(c.edge.keepFraction) << '\n'
     << "chamfer.bins = " << c.binCount << '\n'
     << "chamfer.template_points = " << c.templatePointCount << '\n'
     << "chamfer.scales = " << fmt(c.search.scales) << '\n'
     << "chamfer.rotations = " << fmt(c.search.rotations) << '\n'
     << "chamfer.coarse_stride = " << c.search.coarseStride << '\n'
     << "chamfer.fine_radius = " << c.search.fineRadius << '\n'
     << "prompt.nv = " << c.prompt.Nv << '\n'
     << "prompt.ns = " << c.prompt.Ns << '\n'
     << "prompt.band_min = " << fmt(c.prompt.bandMin) << '\n'
     << "prompt.band_max = " << fmt(c.prompt.bandMax) << '\n'
     << "prompt.margin = " << c.prompt.margin << '\n'
     << "segment.edges = " << (c.segmenterEdges == SegmenterEdges::Gradient ? "gradient" : "combined") << '\n'
     << "ablation.ocm = " << b(c.ablation.ocm) << '\n'
     << "ablation.sg = " << b(c.ablation.sg) << '\n'
     << "ablation.vp = " << b(c.ablation.vp) << '\n'
     << "seed = " << c.seed << '\n';
  return os.str();
}

}  // namespace rap
