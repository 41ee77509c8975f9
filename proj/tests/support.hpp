#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "multiflow/core.hpp"
#include "multiflow/expr.hpp"
#include "multiflow/system.hpp"

namespace testing_support {

using multiflow::DomainBox;
using multiflow::Expr;
using multiflow::LinearSystem;
using multiflow::Matrix;
using multiflow::MatrixFamily;
using multiflow::MultiTime;
using multiflow::Vector;

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Matrix random_matrix(Rng& rng, long rows, long cols, double scale = 1.0) {
  Matrix A(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) A(i, j) = uniform(rng, -scale, scale);
  return A;
}

inline Vector random_vector(Rng& rng, long n, double scale = 1.0) {
  return random_matrix(rng, n, 1, scale).col(0);
}

inline MultiTime random_point(Rng& rng, std::size_t m, double lo, double hi) {
  std::vector<double> c(m);
  for (auto& x : c) x = uniform(rng, lo, hi);
  return MultiTime(c);
}

/// c0 I + c1 A + c2 A^2 + ...
inline Matrix polynomial_of(const Matrix& A, const std::vector<double>& c) {
  Matrix P = Matrix::Zero(A.rows(), A.cols());
  Matrix power = Matrix::Identity(A.rows(), A.cols());
  for (double ci : c) {
    P += ci * power;
    power = power * A;
  }
  return P;
}

/// Truncated Taylor series with scaling and squaring.
inline Matrix taylor_expm(const Matrix& A, int terms = 20) {
  const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.5) {
    scale *= 0.5;
    ++squarings;
  }
  const Matrix B = A * scale;
  Matrix term = Matrix::Identity(A.rows(), A.cols());
  Matrix sum = term;
  for (int j = 1; j <= terms; ++j) {
    term = term * B / static_cast<double>(j);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

/// Classical single-time gramian int_0^T e^{-As} Q e^{-A^T s} ds from the
/// Van Loan block exponential.
inline Matrix van_loan_gramian(const Matrix& A, const Matrix& B, double T) {
  const long n = A.rows();
  Matrix H = Matrix::Zero(2 * n, 2 * n);
  H.topLeftCorner(n, n) = A;
  H.topRightCorner(n, n) = B * B.transpose();
  H.bottomRightCorner(n, n) = -A.transpose();
  const Matrix F = taylor_expm(H * T, 30);
  return F.bottomRightCorner(n, n).transpose() * F.topRightCorner(n, n);
}

/// (N, MN, ..., M^{n-1} N).
inline Matrix classical_kalman(const Matrix& M, const Matrix& N) {
  const long n = M.rows(), k = N.cols();
  Matrix K(n, n * k);
  Matrix block = N;
  for (long p = 0; p < n; ++p) {
    K.middleCols(p * k, k) = block;
    block = M * block;
  }
  return K;
}

inline MatrixFamily parse_family(long rows, long cols,
                                 const std::vector<std::vector<std::string>>& m,
                                 std::size_t dim) {
  std::vector<std::vector<Expr>> members;
  for (const auto& entries : m) {
    std::vector<Expr> e;
    for (const auto& s : entries) e.push_back(Expr::parse(s, dim));
    members.push_back(e);
  }
  return MatrixFamily(rows, cols, members);
}

inline LinearSystem example1() {
  Matrix M1(2, 2), M2 = Matrix::Zero(2, 2), N1(2, 1), N2(2, 1);
  M1 << 1, 0, 0, 0;
  N1 << 1, 0;
  N2 << 0, 1;
  return LinearSystem(MatrixFamily::constant({M1, M2}),
                      MatrixFamily::constant({N1, N2}));
}

inline Matrix cyclic3() {
  Matrix M(3, 3);
  M << 0, 0, 1, 1, 0, 0, 0, 1, 0;
  return M;
}

inline LinearSystem example2() {
  const Matrix M = cyclic3();
  const Matrix I = Matrix::Identity(3, 3);
  return LinearSystem(MatrixFamily::constant({M, M, M}),
                      MatrixFamily::constant({I.col(0), I.col(1), I.col(2)}));
}

/// Commuting constant family: M_alpha polynomials of one random matrix,
/// N shared across alpha. With `identical`, all M_alpha coincide so the
/// gramian condition holds.
inline LinearSystem commuting_system(Rng& rng, std::size_t m, long n, long k,
                                     bool identical, double scale = 0.6) {
  const Matrix A = random_matrix(rng, n, n, scale);
  const Matrix N = random_matrix(rng, n, k);
  std::vector<Matrix> M, Ns;
  const Matrix shared = polynomial_of(
      A, {uniform(rng, -0.5, 0.5), 1.0, uniform(rng, -0.3, 0.3)});
  for (std::size_t a = 0; a < m; ++a) {
    M.push_back(identical
                    ? shared
                    : polynomial_of(A, {uniform(rng, -0.5, 0.5),
                                        uniform(rng, -1.0, 1.0),
                                        uniform(rng, -0.3, 0.3)}));
    Ns.push_back(N);
  }
  return LinearSystem(MatrixFamily::constant(M), MatrixFamily::constant(Ns));
}

/// Rank-deficient commuting family passing the gramian condition with
/// distinct M_alpha: skew A, M_alpha = q(A) + odd_alpha(A), N an orthonormal
/// basis of an A-invariant plane of R^4.
inline LinearSystem invariant_plane_system(Rng& rng, std::size_t m) {
  const double w1 = uniform(rng, 0.3, 1.2), w2 = uniform(rng, 0.3, 1.2);
  Matrix J = Matrix::Zero(4, 4);
  J(0, 1) = -w1;
  J(1, 0) = w1;
  J(2, 3) = -w2;
  J(3, 2) = w2;
  // Random rotation keeps A skew and moves the invariant plane.
  const Matrix R = random_matrix(rng, 4, 4).householderQr().householderQ();
  const Matrix A = R * J * R.transpose();
  const Matrix N = R.leftCols(2);
  const std::vector<double> q{uniform(rng, -0.5, 0.5), 0.0,
                              uniform(rng, -0.3, 0.3)};
  std::vector<Matrix> M, Ns;
  for (std::size_t a = 0; a < m; ++a) {
    const double c1 = uniform(rng, -1, 1), c3 = uniform(rng, -0.2, 0.2);
    M.push_back(polynomial_of(A, q) + c1 * A + c3 * A * A * A);
    Ns.push_back(N);
  }
  return LinearSystem(MatrixFamily::constant(M), MatrixFamily::constant(Ns));
}

inline double rel_err(const Matrix& got, const Matrix& want) {
  return (got - want).norm() / (1.0 + want.norm());
}

/// Random expression built only from forms that are smooth on all of R^m:
/// divisions by 1.5 + sin(.), logarithms of 1 + (.)^2, exponentials of
/// bounded arguments.
inline Expr random_expr(Rng& rng, std::size_t m, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 10);
  const int choice = pick(rng);
  if (choice == 0) {
    return Expr::constant(std::round(uniform(rng, -2.0, 2.0) * 4.0) / 4.0);
  }
  if (choice == 1) {
    return Expr::variable(std::uniform_int_distribution<std::size_t>(0, m - 1)(rng));
  }
  const Expr a = random_expr(rng, m, depth - 1);
  switch (choice) {
    case 2: return a + random_expr(rng, m, depth - 1);
    case 3: return a - random_expr(rng, m, depth - 1);
    case 4: return a * random_expr(rng, m, depth - 1);
    case 5: return a / (Expr::constant(1.5) + sin(random_expr(rng, m, depth - 1)));
    case 6: return log(Expr::constant(1.0) + a * a);
    case 7: return exp(sin(a));
    case 8: return sin(a);
    case 9: return cos(a);
    default: return pow(a, std::uniform_int_distribution<unsigned>(2, 3)(rng));
  }
}

/// Richardson-extrapolated central difference of f along `axis`.
template <class F>
double central_difference(const F& f, std::vector<double> x, std::size_t axis,
                          double h = 1e-3) {
  auto d = [&](double step) {
    auto xp = x, xm = x;
    xp[axis] += step;
    xm[axis] -= step;
    return (f(xp) - f(xm)) / (2.0 * step);
  };
  return (4.0 * d(0.5 * h) - d(h)) / 3.0;
}

}  // namespace testing_support
