#pragma once
#include <cmath>
#include <cstddef>
#include <vector>

namespace mpfem {

// Dense row-major matrix of binary64 carriers.
struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(std::size_t(r) * std::size_t(c), 0.0) {}

  double& operator()(int r, int c) { return a[std::size_t(r) * cols + c]; }
  double operator()(int r, int c) const { return a[std::size_t(r) * cols + c]; }
  double* row(int r) { return a.data() + std::size_t(r) * cols; }
  const double* row(int r) const { return a.data() + std::size_t(r) * cols; }
};

inline double max_abs(const Mat& m) {
  double v = 0.0;
  for (double x : m.a) v = std::max(v, std::fabs(x));
  return v;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

// Largest absolute entrywise difference.
inline double max_abs_diff(const Mat& x, const Mat& y) {
  double v = 0.0;
  for (std::size_t i = 0; i < x.a.size(); ++i) v = std::max(v, std::fabs(x.a[i] - y.a[i]));
  return v;
}

}  // namespace mpfem
