#include "wva/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wva {

namespace pauli {
Matrix2 identity() { return Matrix2::Identity(); }
Matrix2 x() {
  Matrix2 m;
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
Matrix2 y() {
  Matrix2 m;
  m << 0.0, -kI, kI, 0.0;
  return m;
}
Matrix2 z_flipped() {
  Matrix2 m;
  m << -1.0, 0.0, 0.0, 1.0;
  return m;
}
}  // namespace pauli

Matrix4 kron(const Matrix2& a, const Matrix2& b) {
  Matrix4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

namespace {

template <int N>
void sort_descending(HermitianEigen<N>& e) {
  std::array<int, N> order;
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int l, int r) { return e.values[l] > e.values[r]; });
  HermitianEigen<N> sorted;
  for (int k = 0; k < N; ++k) {
    sorted.values[k] = e.values[order[k]];
    sorted.vectors.col(k) = e.vectors.col(order[k]);
  }
  e = sorted;
}

}  // namespace

HermitianEigen<2> eigh(const Matrix2& a) {
  const double p = a(0, 0).real();
  const double d = a(1, 1).real();
  // Average the two off-diagonal entries so slight non-Hermiticity cannot bias the result.
  const Complex b = 0.5 * (a(0, 1) + std::conj(a(1, 0)));
  const double mean = 0.5 * (p + d);
  const double radius = std::hypot(0.5 * (p - d), std::abs(b));

  HermitianEigen<2> e;
  e.values = {mean + radius, mean - radius};
  if (radius == 0.0) return e;

  const double top = e.values[0];
  Vector2 u(b, top - p);
  Vector2 w(top - d, std::conj(b));
  Vector2 v = u.norm() >= w.norm() ? u : w;
  v.normalize();
  e.vectors.col(0) = v;
  e.vectors.col(1) << -std::conj(v(1)), std::conj(v(0));
  return e;
}

HermitianEigen<4> eigh(const Matrix4& input) {
  Matrix4 a = 0.5 * (input + input.adjoint());
  Matrix4 v = Matrix4::Identity();
  const double scale = std::max(a.norm(), 1e-300);

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) off += std::norm(a(i, j));
    if (std::sqrt(off) <= 1e-15 * scale) break;

    for (int p = 0; p < 3; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        const double r = std::abs(a(p, q));
        if (r <= 1e-300) continue;
        const Complex phase = a(p, q) / r;
        const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * r);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        // Rotation restricted to the (p, q) plane: columns p and q of U.
        const Complex upp = c;
        const Complex upq = s;
        const Complex uqp = -s * std::conj(phase);
        const Complex uqq = c * std::conj(phase);

        for (int k = 0; k < 4; ++k) {  // A <- A U
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = akp * upp + akq * uqp;
          a(k, q) = akp * upq + akq * uqq;
        }
        for (int k = 0; k < 4; ++k) {  // A <- U^dagger A
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
          a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int k = 0; k < 4; ++k) {  // V <- V U
          const Complex vkp = v(k, p);
          const Complex vkq = v(k, q);
          v(k, p) = vkp * upp + vkq * uqp;
          v(k, q) = vkp * upq + vkq * uqq;
        }
      }
    }
  }

  HermitianEigen<4> e;
  for (int k = 0; k < 4; ++k) e.values[k] = a(k, k).real();
  e.vectors = v;
  sort_descending(e);
  return e;
}

}  // namespace wva
