#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pjipm/error.hpp"

namespace pjipm {

inline constexpr double pi = std::numbers::pi;

/// Uniform closed grid on [-pi, pi] with n cells and n+1 nodes.
class Grid {
 public:
  Grid() = default;
  explicit Grid(int n) : n_(n), h_(2.0 * pi / n) {
    require(n % 2 == 0, "n must be even");
    require(n >= 16, "n must be at least 16");
  }

  int n() const { return n_; }
  int size() const { return n_ + 1; }
  double h() const { return h_; }

  // Endpoints and the midpoint are pinned so that -pi, 0 and pi are exact.
  double x(int j) const {
    if (j == 0) return -pi;
    if (j == n_) return pi;
    if (2 * j == n_) return 0.0;
    return -pi + j * h_;
  }

  std::vector<double> nodes() const {
    std::vector<double> xs(size());
    for (int j = 0; j < size(); ++j) xs[j] = x(j);
    return xs;
  }

  bool operator==(const Grid& o) const { return n_ == o.n_; }

 private:
  int n_ = 0;
  double h_ = 0.0;
};

inline Grid make_grid(int n) { return Grid(n); }

struct AccuracyPolicy {
  int diff_order = 6;
  int quad_order = 6;
  int interp_order = 6;

  void validate() const {
    require(diff_order == 4 || diff_order == 6, "diff_order must be 4 or 6");
    require(quad_order >= 4 && quad_order <= 10, "quad_order must be in [4, 10]");
    require(interp_order >= 4 && interp_order <= 10, "interp_order must be in [4, 10]");
  }
};

class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(const Grid& g, double fill = 0.0) : grid_(g), v_(g.size(), fill) {}
  GridFunction(const Grid& g, std::vector<double> values) : grid_(g), v_(std::move(values)) {
    require(static_cast<int>(v_.size()) == g.size(), "GridFunction needs n+1 values");
  }

  static GridFunction sample(const Grid& g, const std::function<double(double)>& f) {
    GridFunction out(g);
    for (int j = 0; j < g.size(); ++j) out.v_[j] = f(g.x(j));
    return out;
  }

  const Grid& grid() const { return grid_; }
  int size() const { return static_cast<int>(v_.size()); }
  double& operator[](int j) { return v_[j]; }
  double operator[](int j) const { return v_[j]; }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }
  std::span<const double> span() const { return v_; }
  std::span<double> span() { return v_; }

  bool all_finite() const {
    return std::all_of(v_.begin(), v_.end(), [](double v) { return std::isfinite(v); });
  }

  GridFunction& operator+=(const GridFunction& o) {
    for (int j = 0; j < size(); ++j) v_[j] += o.v_[j];
    return *this;
  }
  GridFunction& operator-=(const GridFunction& o) {
    for (int j = 0; j < size(); ++j) v_[j] -= o.v_[j];
    return *this;
  }
  GridFunction& operator*=(double s) {
    for (double& v : v_) v *= s;
    return *this;
  }
  GridFunction& operator+=(double s) {
    for (double& v : v_) v += s;
    return *this;
  }
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double s, GridFunction a) { return a *= s; }
  friend GridFunction operator*(GridFunction a, double s) { return a *= s; }

 private:
  Grid grid_;
  std::vector<double> v_;
};

inline GridFunction pointwise_product(const GridFunction& a, const GridFunction& b) {
  GridFunction out(a.grid());
  for (int j = 0; j < a.size(); ++j) out[j] = a[j] * b[j];
  return out;
}

inline double sup_norm(const GridFunction& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

/// Maps x to the periodic representative in [-pi, pi].
inline double wrap_angle(double x) {
  if (x >= -pi && x <= pi) return x;
  double r = std::remainder(x, 2.0 * pi);
  if (r < -pi) r += 2.0 * pi;
  if (r > pi) r -= 2.0 * pi;
  return r;
}

namespace detail {

// Fornberg's recursion: weights of the m-th derivative at z for nodes xs.
inline std::vector<double> fd_weights(double z, const std::vector<double>& xs, int m) {
  const int np = static_cast<int>(xs.size());
  std::vector<std::vector<double>> c(np, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0, c4 = xs[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < np; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(np);
  for (int i = 0; i < np; ++i) w[i] = c[i][m];
  return w;
}

inline std::vector<double> offsets(int from, int count) {
  std::vector<double> o(count);
  for (int k = 0; k < count; ++k) o[k] = from + k;
  return o;
}

// Weights w_k with sum_k w_k p(o_k) = int_0^1 p for polynomials of degree < q.
inline std::vector<double> cell_quadrature_weights(const std::vector<double>& o) {
  const int q = static_cast<int>(o.size());
  std::vector<std::vector<double>> m(q, std::vector<double>(q + 1));
  for (int p = 0; p < q; ++p) {
    for (int k = 0; k < q; ++k) m[p][k] = std::pow(o[k], p);
    m[p][q] = 1.0 / (p + 1);
  }
  for (int col = 0; col < q; ++col) {
    int piv = col;
    for (int r = col + 1; r < q; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    std::swap(m[col], m[piv]);
    for (int r = 0; r < q; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int k = col; k <= q; ++k) m[r][k] -= f * m[col][k];
    }
  }
  std::vector<double> w(q);
  for (int k = 0; k < q; ++k) w[k] = m[k][q] / m[k][k];
  return w;
}

}  // namespace detail

/// Finite-difference operator for the m-th derivative (m = 1..3): centered in
/// the interior, one-sided of the same accuracy near the endpoints.
class DiffOperator {
 public:
  DiffOperator(const Grid& g, int m, const AccuracyPolicy& pol = {}) : grid_(g), m_(m) {
    pol.validate();
    require(m >= 1 && m <= 3, "derivative order must be 1, 2 or 3");
    const int p = pol.diff_order;
    const int wc = 2 * ((m + 1) / 2) - 1 + p;
    const int wb = m + p;
    half_ = (wc - 1) / 2;
    require(g.n() + 1 >= wb, "grid too coarse for stencil");
    const double scale = std::pow(g.h(), -m);
    interior_ = detail::fd_weights(0.0, detail::offsets(-half_, wc), m);
    for (double& w : interior_) w *= scale;
    for (int i = 0; i < half_; ++i) {
      auto w = detail::fd_weights(static_cast<double>(i), detail::offsets(0, wb), m);
      for (double& v : w) v *= scale;
      left_.push_back(std::move(w));
    }
    wb_ = wb;
  }

  void apply(std::span<const double> f, std::span<double> out) const {
    const int n = grid_.n();
    for (int i = 0; i <= n; ++i) {
      const double fi = f[i];
      double acc = 0.0;
      if (i >= half_ && i <= n - half_) {
        const int s = i - half_;
        for (int k = 0; k < static_cast<int>(interior_.size()); ++k) acc += interior_[k] * (f[s + k] - fi);
      } else if (i < half_) {
        const auto& w = left_[i];
        for (int k = 0; k < wb_; ++k) acc += w[k] * (f[k] - fi);
      } else {
        // Mirror of the left stencil; odd orders flip sign.
        const auto& w = left_[n - i];
        const double sgn = (m_ % 2 == 1) ? -1.0 : 1.0;
        for (int k = 0; k < wb_; ++k) acc += sgn * w[k] * (f[n - k] - fi);
      }
      out[i] = acc;
    }
  }

  GridFunction operator()(const GridFunction& f) const {
    GridFunction out(grid_);
    apply(f.span(), out.span());
    return out;
  }

 private:
  Grid grid_;
  int m_;
  int half_ = 0;
  int wb_ = 0;
  std::vector<double> interior_;
  std::vector<std::vector<double>> left_;
};

/// First derivative for transport terms v * f_x: upwind-biased stencils of order
/// diff_order + 1 chosen by the sign of v, one-sided near the endpoints.
class UpwindOperator {
 public:
  UpwindOperator(const Grid& g, const AccuracyPolicy& pol = {}) : grid_(g), central_(g, 1, pol) {
    pol.validate();
    const int w = pol.diff_order + 2;
    back_ = w / 2;  // upwind points behind the node
    const double s = 1.0 / g.h();
    plus_ = detail::fd_weights(0.0, detail::offsets(-back_, w), 1);
    minus_ = detail::fd_weights(0.0, detail::offsets(-(w - 1 - back_), w), 1);
    for (double& v : plus_) v *= s;
    for (double& v : minus_) v *= s;
    width_ = w;
  }

  void apply(std::span<const double> f, std::span<const double> v, std::span<double> out) const {
    const int n = grid_.n();
    central_.apply(f, out);  // endpoint rows
    const int fwd = width_ - 1 - back_;
    for (int i = back_; i <= n - back_; ++i) {
      const double fi = f[i];
      double acc = 0.0;
      if (v[i] >= 0.0) {
        if (i + fwd > n) continue;
        for (int k = 0; k < width_; ++k) acc += plus_[k] * (f[i - back_ + k] - fi);
      } else {
        if (i - fwd < 0) continue;
        for (int k = 0; k < width_; ++k) acc += minus_[k] * (f[i - fwd + k] - fi);
      }
      out[i] = acc;
    }
  }

 private:
  Grid grid_;
  DiffOperator central_;
  int back_ = 0;
  int width_ = 0;
  std::vector<double> plus_, minus_;
};

/// Composite cumulative quadrature: F_j = int_{-pi}^{x_j} f.
class CumulativeQuadrature {
 public:
  explicit CumulativeQuadrature(const Grid& g, const AccuracyPolicy& pol = {}) : grid_(g) {
    pol.validate();
    q_ = pol.quad_order;
    const int n = g.n();
    require(n >= q_, "grid too coarse for quadrature");
    starts_.resize(n);
    weights_.resize(n);
    // only a handful of distinct stencils: one interior, a few near each end
    std::vector<std::pair<int, std::vector<double>>> cache;
    for (int j = 0; j < n; ++j) {
      int s = j - (q_ / 2 - 1);
      s = std::clamp(s, 0, n + 1 - q_);
      starts_[j] = s;
      auto hit = std::find_if(cache.begin(), cache.end(), [&](const auto& c) { return c.first == s - j; });
      if (hit == cache.end()) {
        auto w = detail::cell_quadrature_weights(detail::offsets(s - j, q_));
        for (double& v : w) v *= g.h();
        cache.emplace_back(s - j, std::move(w));
        hit = cache.end() - 1;
      }
      weights_[j] = hit->second;
    }
  }

  void apply(std::span<const double> f, std::span<double> out) const {
    const int n = grid_.n();
    double acc = 0.0;
    out[0] = 0.0;
    for (int j = 0; j < n; ++j) {
      const auto& w = weights_[j];
      const int s = starts_[j];
      double cell = 0.0;
      for (int k = 0; k < q_; ++k) cell += w[k] * f[s + k];
      acc += cell;
      out[j + 1] = acc;
    }
  }

  double total(std::span<const double> f) const {
    double acc = 0.0;
    for (int j = 0; j < grid_.n(); ++j) {
      const auto& w = weights_[j];
      for (int k = 0; k < q_; ++k) acc += w[k] * f[starts_[j] + k];
    }
    return acc;
  }

 private:
  Grid grid_;
  int q_ = 6;
  std::vector<int> starts_;
  std::vector<std::vector<double>> weights_;
};

enum class IntegrationBase { MinusPi, Zero };

inline GridFunction derivative(const GridFunction& f, int order = 1, const AccuracyPolicy& pol = {}) {
  return DiffOperator(f.grid(), order, pol)(f);
}

inline GridFunction antiderivative_from(const GridFunction& f, IntegrationBase base = IntegrationBase::MinusPi,
                                        const AccuracyPolicy& pol = {}) {
  GridFunction out(f.grid());
  CumulativeQuadrature(f.grid(), pol).apply(f.span(), out.span());
  if (base == IntegrationBase::Zero) {
    const double f0 = out[f.grid().n() / 2];
    for (double& v : out.values()) v -= f0;
    out[f.grid().n() / 2] = 0.0;
  }
  return out;
}

inline double integral(const GridFunction& f, const AccuracyPolicy& pol = {}) {
  return CumulativeQuadrature(f.grid(), pol).total(f.span());
}

inline double mean(const GridFunction& f, const AccuracyPolicy& pol = {}) {
  return integral(f, pol) / (2.0 * pi);
}

/// int_{-pi}^{pi} f g
inline double inner(const GridFunction& f, const GridFunction& g, const AccuracyPolicy& pol = {}) {
  return integral(pointwise_product(f, g), pol);
}

/// Local Lagrange interpolation of order pol.interp_order; exact at nodes.
inline double interpolate(std::span<const double> f, const Grid& g, double x, const AccuracyPolicy& pol = {}) {
  require(x >= -pi && x <= pi, "interpolation point outside [-pi, pi]");
  const int n = g.n();
  const double pos = (x + pi) / g.h();
  int j = static_cast<int>(std::floor(pos));
  j = std::clamp(j, 0, n);
  if (x == g.x(j)) return f[j];
  if (j + 1 <= n && x == g.x(j + 1)) return f[j + 1];
  const int q = pol.interp_order;
  int s = std::clamp(j - (q / 2 - 1), 0, n + 1 - q);
  double val = 0.0;
  // Barycentric-free Lagrange form on integer offsets.
  const double t = pos - s;
  for (int k = 0; k < q; ++k) {
    double l = 1.0;
    for (int i = 0; i < q; ++i)
      if (i != k) l *= (t - i) / static_cast<double>(k - i);
    val += l * f[s + k];
  }
  return val;
}

inline double interpolate(const GridFunction& f, double x, const AccuracyPolicy& pol = {}) {
  return interpolate(f.span(), f.grid(), x, pol);
}

/// Interpolation of the 2pi-periodic extension.
inline double interpolate_periodic(const GridFunction& f, double x, const AccuracyPolicy& pol = {}) {
  return interpolate(f, wrap_angle(x), pol);
}

/// Location and value of the maximum near node j, refined by Newton steps on the
/// interpolated derivative; falls back to the node if refinement leaves the cell pair.
struct Extremum {
  double x = 0.0;
  double value = 0.0;
  int node = 0;
};

inline int argmax_node(const GridFunction& f) {
  return static_cast<int>(std::max_element(f.values().begin(), f.values().end()) - f.values().begin());
}

inline Extremum refine_max(const GridFunction& f, const GridFunction& df, const GridFunction& d2f, int j,
                           const AccuracyPolicy& pol = {}) {
  const Grid& g = f.grid();
  Extremum e{g.x(j), f[j], j};
  if (j == 0 || j == g.n()) return e;
  double x = g.x(j);
  for (int it = 0; it < 4; ++it) {
    const double d2 = interpolate(d2f, x, pol);
    if (!(d2 < 0.0)) break;
    const double step = -interpolate(df, x, pol) / d2;
    const double xn = x + step;
    if (std::abs(xn - g.x(j)) > g.h()) break;
    x = xn;
    if (std::abs(step) < 1e-15) break;
  }
  const double v = interpolate(f, x, pol);
  if (v >= e.value) {
    e.x = x;
    e.value = v;
  }
  return e;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(const GridFunction& f, const std::string& path) {
  std::ofstream os(path);
  require(static_cast<bool>(os), "cannot open " + path, ErrorCode::IoError);
  os << "x,value\n";
  for (int j = 0; j < f.size(); ++j) os << format_double(f.grid().x(j)) << ',' << format_double(f[j]) << '\n';
}

inline GridFunction read_csv(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), "cannot open " + path, ErrorCode::IoError);
  std::string line;
  std::getline(is, line);
  require(line == "x,value", path + ": expected header x,value", ErrorCode::IoError);
  std::vector<double> xs, vs;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    require(comma != std::string::npos, path + ":" + std::to_string(lineno) + ": malformed row", ErrorCode::IoError);
    try {
      xs.push_back(std::stod(line.substr(0, comma)));
      vs.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::IoError, path + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  require(xs.size() >= 17, path + ": too few rows", ErrorCode::IoError);
  Grid g(static_cast<int>(xs.size()) - 1);
  for (int j = 0; j < g.size(); ++j)
    require(std::abs(xs[j] - g.x(j)) <= 1e-12, path + ": x column is not the uniform grid", ErrorCode::IoError);
  return GridFunction(g, std::move(vs));
}

}  // namespace pjipm
