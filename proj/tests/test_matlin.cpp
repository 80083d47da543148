// Copyright 2026 The listdec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include <cmath>

#include "listdec/matlin.hpp"
#include "oracles.hpp"

using namespace listdec;

namespace {

SymMatrix random_psd(int d, int rank, Rng& rng) {
  std::vector<double> b(static_cast<std::size_t>(d) * rank);
  for (double& v : b) v = rng.gaussian();
  SymMatrix m(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      for (int k = 0; k < rank; ++k)
        s += b[static_cast<std::size_t>(i) * rank + k] *
             b[static_cast<std::size_t>(j) * rank + k];
      m.set(i, j, s);
    }
  return m;
}

}  // namespace

TEST_CASE("psd_pseudo_factor: identity") {
  const PsdFactorization f = psd_pseudo_factor(SymMatrix::identity(3), 1e-8);
  CHECK(f.rank == 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(f.sqrt_pinv(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
      CHECK(f.proj(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
    }
}

TEST_CASE("psd_pseudo_factor: rank-deficient diagonal") {
  const double entries[] = {4.0, 0.0};
  const PsdFactorization f = psd_pseudo_factor(SymMatrix::diag(entries), 1e-8);
  CHECK(f.rank == 1);
  CHECK(f.sqrt_pinv(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.sqrt_pinv(1, 1) == doctest::Approx(0.0));
  CHECK(f.proj(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.proj(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("psd_pseudo_factor: random rank-4 6x6 identity check") {
  // oracle: sqrt_pinv * M * sqrt_pinv must reproduce the range projection
  Rng rng(42);
  const SymMatrix m = random_psd(6, 4, rng);
  const PsdFactorization f = psd_pseudo_factor(m, 1e-8);
  CHECK(f.rank == 4);
  SymMatrix mid = sandwich(f.sqrt_pinv, m);
  mid -= f.proj;
  double worst = 0.0;
  for (double v : mid.data()) worst = std::max(worst, std::abs(v));
  CHECK(worst <= 1e-7);
}

TEST_CASE("psd_pseudo_factor: projection eigenvalues are binary") {
  Rng rng(43);
  const SymMatrix m = random_psd(5, 3, rng);
  const PsdFactorization f = psd_pseudo_factor(m, 1e-8);
  const EigResult e = eigh(sandwich(f.sqrt_pinv, m));
  int ones = 0, zeros = 0;
  for (double v : e.values) {
    if (std::abs(v - 1.0) <= 1e-6) ++ones;
    else if (std::abs(v) <= 1e-6) ++zeros;
  }
  CHECK(ones == f.rank);
  CHECK(zeros == 5 - f.rank);
}

TEST_CASE("psd_pseudo_factor: rejects indefinite matrices") {
  const double entries[] = {1.0, -1.0};
  CHECK_THROWS_AS((void)psd_pseudo_factor(SymMatrix::diag(entries), 1e-8), Error);
}

TEST_CASE("psd_pseudo_factor: Proj equals H times H^dagger") {
  Rng rng(44);
  for (int t = 0; t < 20; ++t) {
    const int d = 2 + static_cast<int>(rng.below(5));
    const int r = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
    const SymMatrix m = random_psd(d, r, rng);
    const PsdFactorization f = psd_pseudo_factor(m);
    const auto hhd = sym_mul_dense(m, f.pinv);
    const double op = op_norm(m);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        CHECK(std::abs(hhd[static_cast<std::size_t>(i) * d + j] - f.proj(i, j)) <=
              1e-7 * op);
  }
}

TEST_CASE("fro_norm and op_norm basics") {
  CHECK(fro_norm(SymMatrix::identity(2)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(op_norm(SymMatrix::identity(2)) == doctest::Approx(1.0));
  const double entries[] = {3.0, -4.0};
  const SymMatrix m = SymMatrix::diag(entries);
  CHECK(fro_norm(m) == doctest::Approx(5.0));
  CHECK(op_norm(m) == doctest::Approx(4.0));
}

TEST_CASE("fro_norm squared equals sum of squared eigenvalues") {
  Rng rng(45);
  SymMatrix m(5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j <= i; ++j) m.set(i, j, rng.gaussian());
  const EigResult e = eigh(m);
  double sum = 0.0;
  for (double v : e.values) sum += v * v;
  const double f = fro_norm(m);
  CHECK(f * f == doctest::Approx(sum).epsilon(1e-9));
}

TEST_CASE("second_moment: small cases") {
  {
    PointSet pts(2, {1.0, 0.0, 0.0, 1.0});
    const SymMatrix h = second_moment(pts);
    CHECK(h(0, 0) == doctest::Approx(0.5));
    CHECK(h(1, 1) == doctest::Approx(0.5));
    CHECK(h(0, 1) == doctest::Approx(0.0));
  }
  {
    PointSet pts(1, {2.0});
    CHECK(second_moment(pts)(0, 0) == doctest::Approx(4.0));
  }
  CHECK_THROWS_AS((void)second_moment(PointSet(3, {})), Error);
}

TEST_CASE("second_moment: Monte Carlo concentration") {
  // 1e5 samples from N(0, diag(1,4)); entrywise within 0.1 of the truth
  Rng rng(46);
  const std::size_t n = 100000;
  std::vector<double> flat(n * 2);
  for (std::size_t i = 0; i < n; ++i) {
    flat[2 * i] = rng.gaussian();
    flat[2 * i + 1] = 2.0 * rng.gaussian();
  }
  const SymMatrix h = second_moment(PointSet(2, std::move(flat)));
  CHECK(std::abs(h(0, 0) - 1.0) <= 0.1);
  CHECK(std::abs(h(1, 1) - 4.0) <= 0.1);
  CHECK(std::abs(h(0, 1)) <= 0.1);
}

TEST_CASE("lifted_top_eig: zero covariance is degenerate") {
  PointSet pts(2, {1.0, 2.0, 1.0, 2.0, 1.0, 2.0});
  const LiftedEigResult r = lifted_top_eig(pts, 1);
  CHECK(r.eigenvalue == doctest::Approx(0.0));
  CHECK(r.converged);
  CHECK(r.matrix_a(0, 0) == doctest::Approx(1.0));
  CHECK(r.matrix_a(0, 1) == doctest::Approx(0.0));
  CHECK(r.matrix_a(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("lifted_top_eig: one-dimensional variance of squares") {
  // lifted values {1, 4, 9}: population variance 98/9
  PointSet pts(1, {1.0, 2.0, 3.0});
  const LiftedEigResult r = lifted_top_eig(pts, 7);
  CHECK(r.eigenvalue == doctest::Approx(98.0 / 9.0).epsilon(1e-9));
  CHECK(std::abs(r.matrix_a(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lifted_top_eig: matches materialized lifted covariance") {
  Rng rng(47);
  std::vector<double> flat(40);
  for (double& v : flat) v = rng.gaussian();
  const PointSet pts(2, std::move(flat));
  const SymMatrix lifted_cov = oracles::materialized_lifted_covariance(pts);
  const double lam_max = eigh(lifted_cov).values.front();
  const LiftedEigResult r = lifted_top_eig(pts, 11, 2000, 1e-13);
  CHECK(r.eigenvalue == doctest::Approx(lam_max).epsilon(1e-6));
  CHECK(fro_norm(r.matrix_a) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("lifted_top_eig: half-optimal Rayleigh quotient on random instances") {
  Rng rng(48);
  for (int t = 0; t < 25; ++t) {
    const int d = 1 + static_cast<int>(rng.below(6));
    const std::size_t n = 5 + rng.below(46);
    std::vector<double> flat(n * static_cast<std::size_t>(d));
    for (double& v : flat) v = rng.gaussian() * (1.0 + 2.0 * rng.uniform01());
    const PointSet pts(d, std::move(flat));
    const SymMatrix lifted_cov = oracles::materialized_lifted_covariance(pts);
    const double lam_max = std::max(eigh(lifted_cov).values.front(), 0.0);
    const LiftedEigResult r = lifted_top_eig(pts, rng.next_u64());
    if (lam_max > 1e-12)
      CHECK(oracles::lifted_rayleigh(lifted_cov, r.matrix_a) >= 0.5 * lam_max);
  }
}

TEST_CASE("lifted_top_eig: deterministic for fixed seed") {
  Rng rng(49);
  std::vector<double> flat(60);
  for (double& v : flat) v = rng.gaussian();
  const PointSet pts(3, std::move(flat));
  const LiftedEigResult a = lifted_top_eig(pts, 123);
  const LiftedEigResult b = lifted_top_eig(pts, 123);
  CHECK(a.eigenvalue == b.eigenvalue);
  CHECK(a.matrix_a.data() == b.matrix_a.data());
}

TEST_CASE("fro_norm submultiplicative bound") {
  Rng rng(50);
  for (int t = 0; t < 30; ++t) {
    const int d = 2 + static_cast<int>(rng.below(5));
    SymMatrix r(d), m(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j <= i; ++j) {
        r.set(i, j, rng.gaussian());
        m.set(i, j, rng.gaussian());
      }
    const auto rm = sym_mul_dense(r, m);
    double f2 = 0.0;
    for (double v : rm) f2 += v * v;
    const double lhs = std::sqrt(f2);
    CHECK(lhs <= std::min(fro_norm(r) * op_norm(m), op_norm(r) * fro_norm(m)) *
                     (1.0 + 1e-9));
  }
}

TEST_CASE("SymMatrix construction symmetrizes and checks finiteness") {
  const std::vector<double> dense{1.0, 2.0, 4.0, 3.0};
  const SymMatrix m = SymMatrix::from_dense(2, dense);
  CHECK(m(0, 1) == doctest::Approx(3.0));
  CHECK(m(1, 0) == doctest::Approx(3.0));
  const std::vector<double> bad{1.0, 0.0, 0.0, std::nan("")};
  CHECK_THROWS_AS((void)SymMatrix::from_dense(2, bad), Error);
}
