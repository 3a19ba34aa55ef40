#pragma once

// Independent reference implementations. Deliberately naive: direct loops,
// two-pass statistics, explicit enumeration. They share no code with the
// library beyond ImageBuf and the plain config structs.

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "mriforge/detect.hpp"
#include "mriforge/image.hpp"
#include "mriforge/ssim.hpp"

namespace oracle {

using mriforge::ImageBuf;
using mriforge::Label;

struct Stats {
  double mx, my, sx, sy, sxy;
};

// Zero-padded N x N window: collect the N^2 samples, then mean, then
// deviations about that mean with divisor N^2 - 1.
inline Stats window(const ImageBuf& x, const ImageBuf& y, int px, int py, int ch, int n) {
  std::vector<double> a, b;
  const int r = n / 2;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const int qx = px + dx, qy = py + dy;
      const bool in = qx >= 0 && qy >= 0 && qx < x.width() && qy < x.height();
      a.push_back(in ? x.at(qx, qy, ch) : 0.0);
      b.push_back(in ? y.at(qx, qy, ch) : 0.0);
    }
  }
  double sa = 0, sb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
  }
  const double count = static_cast<double>(a.size());
  Stats s{sa / count, sb / count, 0, 0, 0};
  double vxx = 0, vyy = 0, vxy = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    vxx += (a[i] - s.mx) * (a[i] - s.mx);
    vyy += (b[i] - s.my) * (b[i] - s.my);
    vxy += (a[i] - s.mx) * (b[i] - s.my);
  }
  s.sx = std::sqrt(vxx / (count - 1));
  s.sy = std::sqrt(vyy / (count - 1));
  s.sxy = vxy / (count - 1);
  return s;
}

// Luminance, contrast and structure multiplied with their exponents.
inline double ssim_at(const Stats& s, const mriforge::SsimConfig& cfg) {
  const double c1 = std::pow(cfg.k1 * cfg.range, 2);
  const double c2 = std::pow(cfg.k2 * cfg.range, 2);
  const double c3 = c2 / 2;
  const double l = (2 * s.mx * s.my + c1) / (s.mx * s.mx + s.my * s.my + c1);
  const double c = (2 * s.sx * s.sy + c2) / (s.sx * s.sx + s.sy * s.sy + c2);
  const double st = (s.sxy + c3) / (s.sx * s.sy + c3);
  return std::pow(l, cfg.alpha) * std::pow(c, cfg.beta) * std::pow(st, cfg.gamma);
}

// Map in (y, x, c) order matching ImageBuf layout.
inline std::vector<double> ssim_map(const ImageBuf& x, const ImageBuf& y, const mriforge::SsimConfig& cfg) {
  std::vector<double> out;
  for (int py = 0; py < x.height(); ++py)
    for (int px = 0; px < x.width(); ++px)
      for (int ch = 0; ch < x.channels(); ++ch) out.push_back(ssim_at(window(x, y, px, py, ch, cfg.window), cfg));
  return out;
}

// Counts faces one at a time; no library call.
inline std::pair<Label, double> aggregate(const std::vector<double>& probs, double threshold, double fraction) {
  int above = 0;
  int total = 0;
  for (double p : probs) {
    ++total;
    if (p > threshold) ++above;
  }
  const double score = static_cast<double>(above) / total;
  return {score > fraction ? Label::Fake : Label::Real, score};
}

// Area under the ROC polyline, sweeping the threshold down through every
// distinct score; tied scores move TPR and FPR together (a diagonal segment).
inline double trapezoid_auc(const std::vector<double>& scores, const std::vector<Label>& labels) {
  std::map<double, std::pair<int, int>, std::greater<>> at;  // score -> (pos, neg)
  int pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == Label::Fake) {
      ++at[scores[i]].first;
      ++pos;
    } else {
      ++at[scores[i]].second;
      ++neg;
    }
  }
  double area = 0, tpr = 0, fpr = 0;
  for (const auto& [s, c] : at) {
    const double ntpr = tpr + static_cast<double>(c.first) / pos;
    const double nfpr = fpr + static_cast<double>(c.second) / neg;
    area += (nfpr - fpr) * (tpr + ntpr) / 2;
    tpr = ntpr;
    fpr = nfpr;
  }
  return area;
}

// eta * (mean squared fake error + mean squared real error), plain loops.
inline double discriminator(const std::vector<double>& ft, const std::vector<double>& fp,
                            const std::vector<double>& rt, const std::vector<double>& rp, double eta) {
  double a = 0, b = 0;
  for (std::size_t i = 0; i < ft.size(); ++i) a += (ft[i] - fp[i]) * (ft[i] - fp[i]);
  for (std::size_t i = 0; i < rt.size(); ++i) b += (rt[i] - rp[i]) * (rt[i] - rp[i]);
  return eta * (a / ft.size() + b / rt.size());
}

}  // namespace oracle
