#include "drs/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "drs/rng.hpp"

namespace drs::synthetic {

const std::vector<double>& sports_rungs() {
  static const std::vector<double> r = {1000, 1500, 2000, 3000, 4000, 6000, 8000, 10000};
  return r;
}

namespace {

double normal(Rng& rng) {
  // Box-Muller; u1 is kept away from 0.
  const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

struct Shape {
  double ceiling;
  double log_midpoint;
};

// Anchors at 540p, 720p and 1080p relative to a 1080p top size, chosen so the
// 540p/720p curves cross near 2 Mbps and 720p/1080p near 5 Mbps. Other sizes
// interpolate linearly in log pixel share.
Shape shape_for(double log_share) {
  struct Anchor {
    double log_share, ceiling, midpoint_kbps;
  };
  static const Anchor anchors[] = {{std::log(0.25), 7.5, 1000.0},
                                   {std::log(0.25 * 16.0 / 9.0), 9.2, 1550.0},
                                   {0.0, 10.0, 2100.0}};
  std::size_t i = log_share < anchors[1].log_share ? 0 : 1;
  const Anchor& a = anchors[i];
  const Anchor& b = anchors[i + 1];
  const double t = (log_share - a.log_share) / (b.log_share - a.log_share);
  const double ceiling = std::min(10.0, a.ceiling + t * (b.ceiling - a.ceiling));
  const double mid = std::log(a.midpoint_kbps) + t * (std::log(b.midpoint_kbps) - std::log(a.midpoint_kbps));
  return {ceiling, mid};
}

}  // namespace

std::vector<ladder::QualityEntry> quality_log(const QualityLogOptions& o) {
  Rng rng(derive_seed(o.seed, 0x5eed));
  std::vector<Resolution> res = o.resolutions;
  std::sort(res.begin(), res.end());
  const double top_pixels = static_cast<double>(res.back().pixels());

  std::vector<ladder::QualityEntry> out;
  out.reserve(o.gops * o.rungs.size() * res.size());
  double complexity = 0.0;  // log-scale, mean reverting
  for (std::size_t g = 0; g < o.gops; ++g) {
    complexity = 0.97 * complexity + 0.2 * normal(rng);
    if (g > 0 && uniform01(rng) < 0.01) complexity = 0.8 * normal(rng);  // scene cut
    for (double rate : o.rungs) {
      for (const auto& r : res) {
        const double share = static_cast<double>(r.pixels()) / top_pixels;  // <= 1
        const Shape shape = shape_for(std::log(share));
        const double ceiling = shape.ceiling;
        const double midpoint = shape.log_midpoint + complexity;
        const double slope = 0.75;
        const double q = ceiling / (1.0 + std::exp(-(std::log(rate) - midpoint) / slope)) + o.noise * normal(rng);
        out.push_back({o.content_id, static_cast<int>(g), rate, r, std::clamp(q, 0.0, 10.0)});
      }
    }
  }
  return out;
}

}  // namespace drs::synthetic
