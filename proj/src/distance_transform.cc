#include "peace/distance_transform.h"

#include <cmath>
#include <limits>
#include <vector>

namespace peace {
namespace {

constexpr double kInf = 1e20;

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher), 1D squared EDT.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  auto intersect = [&](int q, int p) {
    return ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) / (2.0 * (q - p));
  };
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double diff = q - v[k];
    d[q] = diff * diff + f[v[k]];
  }
}

}  // namespace

Grid<double> euclidean_distance_transform(const Grid<std::uint8_t>& foreground, bool border_is_background) {
  const int pad = border_is_background ? 1 : 0;
  const int w = foreground.width + 2 * pad;
  const int h = foreground.height + 2 * pad;
  Grid<double> sq(w, h, pad ? 0.0 : kInf);
  bool any_background = pad != 0;
  for (int y = 0; y < foreground.height; ++y) {
    for (int x = 0; x < foreground.width; ++x) {
      const bool fg = foreground.at(x, y);
      sq.at(x + pad, y + pad) = fg ? kInf : 0.0;
      any_background |= !fg;
    }
  }
  Grid<double> out(foreground.width, foreground.height, std::numeric_limits<double>::infinity());
  if (!any_background) return out;

  const int n = std::max(w, h);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (int x = 0; x < w; ++x) {
    f.resize(h);
    d.resize(h);
    for (int y = 0; y < h; ++y) f[y] = sq.at(x, y);
    edt_1d(f, d, v, z);
    for (int y = 0; y < h; ++y) sq.at(x, y) = d[y];
  }
  for (int y = 0; y < h; ++y) {
    f.resize(w);
    d.resize(w);
    for (int x = 0; x < w; ++x) f[x] = sq.at(x, y);
    edt_1d(f, d, v, z);
    for (int x = 0; x < w; ++x) sq.at(x, y) = d[x];
  }
  for (int y = 0; y < foreground.height; ++y) {
    for (int x = 0; x < foreground.width; ++x) out.at(x, y) = std::sqrt(sq.at(x + pad, y + pad));
  }
  return out;
}

}  // namespace peace
