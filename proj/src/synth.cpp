#include "rap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rap/arrayio.hpp"
#include "rap/errors.hpp"
#include "rap/imgproc.hpp"

namespace rap {

std::uint64_t SplitMix::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double SplitMix::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double SplitMix::normal() {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

struct OrganShape {
  double a, b;      // semi-axes, px
  double cx, cy;    // nominal centre as a fraction of the image
  double angle;     // degrees
  double intensity;
};

// Two classes with distinct size, placement and brightness.
const OrganShape kClasses[] = {
    {50.0, 32.0, 0.45, 0.50, 20.0, 0.70},
    {34.0, 20.0, 0.55, 0.45, -30.0, 0.55},
};

struct Ellipse {
  double cx, cy, a, b, theta;  // theta radians
  double wobble, phase;        // boundary modulation

  // Normalised radius: < 1 inside. Returned with the polar angle.
  double rho(double x, double y, double* phi = nullptr) const {
    const double dx = x - cx, dy = y - cy;
    const double u = (dx * std::cos(theta) + dy * std::sin(theta)) / a;
    const double v = (-dx * std::sin(theta) + dy * std::cos(theta)) / b;
    const double ang = std::atan2(v, u);
    if (phi) *phi = ang;
    return std::hypot(u, v) / (1.0 + wobble * std::sin(3.0 * ang + phase));
  }
};

std::vector<double> random_vector(SplitMix& rng, int d, double scale) {
  std::vector<double> v(static_cast<std::size_t>(d));
  for (double& x : v) x = scale * rng.normal();
  return v;
}

}  // namespace

std::vector<LoadedCase> generate_synthetic(int caseCount, std::uint64_t seed, const SynthParams& p) {
  if (caseCount < 2) throw ConfigError("synth needs at least two cases");
  if (p.size < 32 || p.gridSize < 2 || p.featureDim < 4) throw ConfigError("synth parameters too small");
  const int classCount = std::min<int>(p.classCount, static_cast<int>(std::size(kClasses)));
  if (classCount < 1) throw ConfigError("synth needs at least one class");
  const int N = p.size;
  const int G = p.gridSize;
  const int D = p.featureDim;

  // Shared embedding vocabulary.
  SplitMix vocab(seed ^ 0xA5A5A5A5ull);
  std::vector<std::vector<double>> organProto, organRadial;
  for (int c = 0; c < classCount; ++c) {
    organProto.push_back(random_vector(vocab, D, 1.0));
    organRadial.push_back(random_vector(vocab, D, 1.0));
  }
  const auto background = random_vector(vocab, D, 1.0);
  const auto posX = random_vector(vocab, D, 1.0);
  const auto posY = random_vector(vocab, D, 1.0);
  const auto distractor = random_vector(vocab, D, 1.0);

  std::vector<LoadedCase> cases;
  for (int i = 0; i < caseCount; ++i) {
    SplitMix rng(seed * 0x100000001B3ull + static_cast<std::uint64_t>(i) + 1);
    const int cls = i % classCount;
    const OrganShape& shape = kClasses[cls];

    const double s = rng.uniform(0.85, 1.15);
    Ellipse organ{shape.cx * N + rng.uniform(-24.0, 24.0),
                  shape.cy * N + rng.uniform(-24.0, 24.0),
                  shape.a * s * rng.uniform(0.95, 1.05),
                  shape.b * s * rng.uniform(0.95, 1.05),
                  (shape.angle + rng.uniform(-12.0, 12.0)) * std::numbers::pi / 180.0,
                  0.05,
                  rng.uniform(0.0, 2.0 * std::numbers::pi)};

    // Distractor kept clear of the organ.
    Ellipse blob{};
    for (int attempt = 0; attempt < 64; ++attempt) {
      blob = {rng.uniform(0.15, 0.85) * N, rng.uniform(0.15, 0.85) * N, rng.uniform(12.0, 20.0),
              rng.uniform(10.0, 16.0), rng.uniform(0.0, std::numbers::pi), 0.0, 0.0};
      const double gap = std::hypot(blob.cx - organ.cx, blob.cy - organ.cy);
      if (gap > std::max(organ.a, organ.b) + blob.a + 12.0) break;
    }

    const double gain = rng.uniform(0.85, 1.15);
    const double offset = rng.uniform(-0.05, 0.05);
    double waves[3][3];
    for (auto& w : waves) {
      w[0] = rng.uniform(0.01, 0.04);
      w[1] = rng.uniform(0.0, 2.0 * std::numbers::pi);
      w[2] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }

    LoadedCase out;
    out.id = "case" + std::string(i < 10 ? "0" : "") + std::to_string(i);
    out.classId = "organ" + std::to_string(cls);
    out.image = Image(N, N);
    out.mask = BinaryMask(N, N);
    BinaryMask blobMask(N, N);
    ScalarGrid radial(N, N);
    for (int y = 0; y < N; ++y)
      for (int x = 0; x < N; ++x) {
        const double fx = static_cast<double>(x) / N;
        const double fy = static_cast<double>(y) / N;
        double v = 0.25;
        for (const auto& w : waves) v += w[0] * std::cos(2.0 * std::numbers::pi * (fx * std::cos(w[1]) + fy * std::sin(w[1])) * 2.0 + w[2]);
        const double r = organ.rho(x, y);
        if (r < 1.0) {
          out.mask(x, y) = 1;
          radial(x, y) = r;
          v = shape.intensity - 0.08 * r * r;
        } else if (blob.rho(x, y) < 1.0) {
          blobMask(x, y) = 1;
          v = 0.45;
        }
        v += 0.02 * rng.normal();
        out.image(x, y) = static_cast<float>(std::clamp(gain * v + offset, 0.0, 1.0));
      }

    out.features = FeatureMap(G, G, D);
    for (int gy = 0; gy < G; ++gy)
      for (int gx = 0; gx < G; ++gx) {
        const auto [x0, x1] = cell_span(gx, G, N);
        const auto [y0, y1] = cell_span(gy, G, N);
        double fo = 0.0, fd = 0.0, rsum = 0.0;
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) {
            if (out.mask(x, y)) {
              fo += 1.0;
              rsum += radial(x, y);
            } else if (blobMask(x, y)) {
              fd += 1.0;
            }
          }
        const double area = static_cast<double>((x1 - x0) * (y1 - y0));
        const double rho = fo > 0.0 ? rsum / fo : 0.0;
        fo /= area;
        fd /= area;
        const double fb = 1.0 - fo - fd;
        const double px = (gx + 0.5) / G - 0.5;
        const double py = (gy + 0.5) / G - 0.5;
        auto cell = out.features.cell(gx, gy);
        for (int k = 0; k < D; ++k) {
          const auto ks = static_cast<std::size_t>(k);
          const double organTerm = organProto[cls][ks] + 0.6 * (rho - 0.5) * organRadial[cls][ks];
          const double bgTerm = background[ks] + 0.5 * px * posX[ks] + 0.5 * py * posY[ks];
          cell[ks] = static_cast<float>(fo * organTerm + fd * distractor[ks] + fb * bgTerm + 0.1 * rng.normal());
        }
      }
    cases.push_back(std::move(out));
  }
  return cases;
}

std::filesystem::path write_synthetic(const std::vector<LoadedCase>& cases, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<DatasetCase> entries;
  for (const auto& c : cases) {
    DatasetCase e{c.id, c.classId, dir / (c.id + "_image.raf"), dir / (c.id + "_mask.raf"),
                  dir / (c.id + "_features.raf")};
    write_array(c.image, e.image);
    write_array(c.mask, e.mask);
    write_array(c.features, e.features);
    entries.push_back(std::move(e));
  }
  const auto manifest = dir / "manifest.json";
  write_dataset_manifest(entries, manifest);
  return manifest;
}

}  // namespace rap
