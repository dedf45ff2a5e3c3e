#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "conserva/conservation.hpp"
#include "conserva/equilibrium.hpp"
#include "conserva/rng.hpp"
#include "conserva/systems.hpp"

using conserva::LotkaVolterraSystem;
using conserva::Matrix;
using conserva::ReplicatorSystem;
using conserva::Vector;

namespace {

Vector random_interior_simplex(conserva::Rng& rng, int n) {
  Vector x = rng.uniform_vector(n, 0.05, 1.0);
  return x / x.sum();
}

Matrix random_matrix(conserva::Rng& rng, int rows, int cols, double lo = -1.0,
                     double hi = 1.0) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) m.row(i) = rng.uniform_vector(cols, lo, hi).transpose();
  return m;
}

// Payoff [[A', r], [0, 0]] with r = -A'q', so the simplex embedding of q' is
// a formal equilibrium with all payoff averages zero.
ReplicatorSystem equilibrium_payoff(const Matrix& interaction, const Vector& qprime) {
  const int m = static_cast<int>(qprime.size());
  Matrix a = Matrix::Zero(m + 1, m + 1);
  a.topLeftCorner(m, m) = interaction;
  a.topRightCorner(m, 1) = -interaction * qprime;
  return ReplicatorSystem(a);
}

Matrix classic_predator_prey() {
  Matrix a(2, 2);
  a << 0, 1, -1, 0;
  return a;
}

}  // namespace

TEST_CASE("system constructors validate their input") {
  CHECK_THROWS_AS(ReplicatorSystem(Matrix::Zero(2, 3)), std::invalid_argument);
  CHECK_THROWS_AS(ReplicatorSystem(Matrix::Zero(0, 0)), std::invalid_argument);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(ReplicatorSystem{bad}, std::invalid_argument);
  CHECK_THROWS_AS(LotkaVolterraSystem(Matrix::Zero(2, 2), Vector::Zero(3)),
                  std::invalid_argument);
  CHECK_NOTHROW(LotkaVolterraSystem(Matrix::Zero(1, 1), Vector::Zero(1)));
}

TEST_CASE("normalize_payoff subtracts the last row") {
  Matrix a(3, 3);
  a << 0, -1, 1, 1, 0, -1, -1, 1, 0;
  const ReplicatorSystem normalized = normalize_payoff(ReplicatorSystem(a));
  Matrix expected(3, 3);
  expected << 1, -2, 1, 2, -1, -1, 0, 0, 0;
  CHECK((normalized.payoff() - expected).cwiseAbs().maxCoeff() == 0.0);

  SUBCASE("zero last row is a fixed point") {
    const ReplicatorSystem again = normalize_payoff(normalized);
    CHECK((again.payoff() - expected).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("all-ones payoff normalizes to zero") {
    const ReplicatorSystem z = normalize_payoff(ReplicatorSystem(Matrix::Ones(3, 3)));
    CHECK(z.payoff().cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("the field is unchanged at random simplex points") {
    conserva::Rng rng(3);
    const ReplicatorSystem original{a};
    for (int i = 0; i < 10; ++i) {
      const Vector x = random_interior_simplex(rng, 3);
      const Vector v0 = replicator_field(original, x);
      const Vector v1 = replicator_field(normalized, x);
      CHECK((v0 - v1).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("replicator_field fixed points and tangency") {
  conserva::Rng rng(5);
  const ReplicatorSystem sys{random_matrix(rng, 4, 4)};

  SUBCASE("vertices are equilibria") {
    for (int k = 0; k < 4; ++k) {
      Vector vertex = Vector::Zero(4);
      vertex(k) = 1.0;
      CHECK(replicator_field(sys, vertex).cwiseAbs().maxCoeff() < 1e-15);
    }
  }
  SUBCASE("equal payoff rows give the zero field") {
    Matrix rows = Matrix::Zero(4, 4);
    rows.rowwise() = rng.uniform_vector(4, -2.0, 2.0).transpose();
    const ReplicatorSystem flat{rows};
    for (int i = 0; i < 5; ++i) {
      const Vector x = random_interior_simplex(rng, 4);
      CHECK(replicator_field(flat, x).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
  SUBCASE("the uniform point of the embedded predator-prey game is fixed") {
    Matrix a(3, 3);
    a << 0, 1, -1, -1, 0, 1, 0, 0, 0;
    const Vector x = Vector::Constant(3, 1.0 / 3.0);
    CHECK(replicator_field(ReplicatorSystem(a), x).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("velocities sum to zero on the simplex") {
    for (int i = 0; i < 20; ++i) {
      const Vector x = random_interior_simplex(rng, 4);
      CHECK(std::abs(replicator_field(sys, x).sum()) < 1e-12);
    }
  }
  SUBCASE("adding an equal-rows matrix never changes the field") {
    Matrix c = Matrix::Zero(4, 4);
    c.rowwise() = rng.uniform_vector(4, -3.0, 3.0).transpose();
    const ReplicatorSystem shifted{sys.payoff() + c};
    for (int i = 0; i < 20; ++i) {
      const Vector x = random_interior_simplex(rng, 4);
      const Vector diff = replicator_field(sys, x) - replicator_field(shifted, x);
      CHECK(diff.cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  CHECK_THROWS_AS(replicator_field(sys, Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("lv_field zeros and face invariance") {
  const LotkaVolterraSystem pp(classic_predator_prey(), (Vector(2) << -1, 1).finished());

  CHECK(lv_field(pp, Vector::Zero(2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(lv_field(pp, Vector::Ones(2)).cwiseAbs().maxCoeff() < 1e-15);

  conserva::Rng rng(9);
  const LotkaVolterraSystem big(random_matrix(rng, 4, 4), rng.uniform_vector(4, -1, 1));
  for (int k = 0; k < 4; ++k) {
    Vector y = rng.uniform_vector(4, 0.1, 2.0);
    y(k) = 0.0;
    CHECK(lv_field(big, y)(k) == 0.0);  // coordinate faces stay invariant
  }
  CHECK_THROWS_AS(lv_field(big, Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("interaction_bivector structure") {
  conserva::Rng rng(12);

  SUBCASE("zero payoff gives the zero matrix") {
    const ReplicatorSystem sys{Matrix::Zero(3, 3)};
    const Vector x = random_interior_simplex(rng, 3);
    CHECK(interaction_bivector(sys, x).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("vanishes at every vertex") {
    const ReplicatorSystem sys{random_matrix(rng, 4, 4)};
    for (int k = 0; k < 4; ++k) {
      Vector vertex = Vector::Zero(4);
      vertex(k) = 1.0;
      CHECK(interaction_bivector(sys, vertex).cwiseAbs().maxCoeff() < 1e-15);
    }
  }
  SUBCASE("the field is the bivector applied to the log-likelihood gradient") {
    // With q a formal equilibrium, grad of sum_i q_i log x_i has components
    // q_i / x_i and the bivector maps it to the replicator field.
    for (int trial = 0; trial < 5; ++trial) {
      const int m = rng.uniform_int(2, 4);
      const Vector qprime = rng.uniform_vector(m, 0.2, 2.0);
      const ReplicatorSystem sys = equilibrium_payoff(random_matrix(rng, m, m), qprime);
      Vector q(m + 1);
      q.head(m) = qprime;
      q(m) = 1.0;
      q /= q.sum();
      for (int i = 0; i < 4; ++i) {
        const Vector x = random_interior_simplex(rng, m + 1);
        const Vector grad = q.cwiseQuotient(x);
        const Vector via_structure = interaction_bivector(sys, x) * grad;
        const Vector direct = replicator_field(sys, x);
        CHECK((via_structure - direct).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }
}

TEST_CASE("chart maps invert each other and behave at the center") {
  conserva::Rng rng(17);

  const Vector center = conserva::chart_to_simplex(Vector::Zero(3));
  CHECK((center - Vector::Constant(4, 0.25)).cwiseAbs().maxCoeff() < 1e-15);

  for (int i = 0; i < 100; ++i) {
    const int m = rng.uniform_int(1, 5);
    const Vector u = rng.uniform_vector(m, -3.0, 3.0);
    const Vector back = conserva::simplex_to_chart(conserva::chart_to_simplex(u));
    CHECK((back - u).cwiseAbs().maxCoeff() < 1e-12);
  }

  Vector boundary(3);
  boundary << 0.5, 0.5, 0.0;
  CHECK_THROWS_AS(conserva::simplex_to_chart(boundary), std::domain_error);
}

TEST_CASE("chart Jacobian columns are simplex-tangent and match finite differences") {
  conserva::Rng rng(19);
  const Vector u = rng.uniform_vector(3, -1.5, 1.5);
  const Matrix j = conserva::chart_jacobian(u);
  REQUIRE(j.rows() == 4);
  REQUIRE(j.cols() == 3);
  for (int c = 0; c < 3; ++c) {
    CHECK(std::abs(j.col(c).sum()) < 1e-12);
    const double h = 1e-6;
    Vector up = u, dn = u;
    up(c) += h;
    dn(c) -= h;
    const Vector fd =
        (conserva::chart_to_simplex(up) - conserva::chart_to_simplex(dn)) / (2 * h);
    CHECK((j.col(c) - fd).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("contrast matrix patterns") {
  const Matrix e2 = conserva::contrast_matrix(2);
  REQUIRE(e2.rows() == 1);
  CHECK(e2(0, 0) == -1.0);
  CHECK(e2(0, 1) == 1.0);

  Matrix expected(2, 3);
  expected << -1, 0, 1, 0, -1, 1;
  CHECK((conserva::contrast_matrix(3) - expected).cwiseAbs().maxCoeff() == 0.0);

  for (int n = 2; n <= 6; ++n) {
    CHECK((conserva::contrast_matrix(n) * Vector::Ones(n)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("chart field matrix: zero payoff, block formula, and scalar case") {
  CHECK(conserva::chart_field_matrix(ReplicatorSystem(Matrix::Zero(3, 3)))
            .cwiseAbs()
            .maxCoeff() == 0.0);

  conserva::Rng rng(23);
  SUBCASE("last-row-zero equilibrium payoffs factor through the chart factor") {
    for (int trial = 0; trial < 10; ++trial) {
      const int m = rng.uniform_int(1, 5);
      const Matrix interaction = random_matrix(rng, m, m);
      const Vector qprime = rng.uniform_vector(m, 0.1, 2.0);
      const ReplicatorSystem sys = equilibrium_payoff(interaction, qprime);
      const Vector q = conserva::embed_orthant_equilibrium(qprime);
      const Matrix lhs = conserva::chart_field_matrix(sys);
      const Matrix rhs = -interaction * conserva::chart_factor(q);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("two-strategy hand case") {
    const double a = 1.7, q1 = 0.3, q2 = 0.7;
    Matrix payoff(2, 2);
    payoff << a, -(q1 / q2) * a, 0, 0;
    const Matrix b = conserva::chart_field_matrix(ReplicatorSystem(payoff));
    CHECK(b(0, 0) == doctest::Approx(-a / q2).epsilon(1e-12));
  }
}

TEST_CASE("equilibrium offset vanishes at the matched point and drives the chart field") {
  const Vector uniform = Vector::Constant(4, 0.25);
  CHECK(conserva::equilibrium_offset(uniform, Vector::Zero(3)).cwiseAbs().maxCoeff() <
        1e-15);

  conserva::Rng rng(29);
  const Vector q = random_interior_simplex(rng, 4);
  const Vector u = rng.uniform_vector(3, -2.0, 2.0);
  const Vector eta = conserva::equilibrium_offset(q, u);
  const Vector phi = conserva::chart_to_simplex(u);
  CHECK((eta - (q.head(3) - phi.head(3))).cwiseAbs().maxCoeff() < 1e-15);

  SUBCASE("offset is the chart gradient of the log-likelihood potential") {
    // Potential sum_i q_i u_i - log(1 + sum_i e^{u_i}); central differences.
    const auto potential = [&](const Vector& w) {
      double s = 0.0;
      for (int i = 0; i < w.size(); ++i) s += std::exp(w(i));
      return q.head(3).dot(w) - std::log1p(s);
    };
    const double h = 1e-6;
    for (int c = 0; c < 3; ++c) {
      Vector up = u, dn = u;
      up(c) += h;
      dn(c) -= h;
      const double fd = (potential(up) - potential(dn)) / (2 * h);
      CHECK(std::abs(fd - eta(c)) < 1e-6 * (1 + std::abs(eta(c))));
    }
  }
}

TEST_CASE("chart field pushes forward to the replicator field") {
  conserva::Rng rng(31);
  for (int trial = 0; trial < 4; ++trial) {
    const int m = rng.uniform_int(2, 4);
    const Vector qprime = rng.uniform_vector(m, 0.2, 1.5);
    const ReplicatorSystem sys = equilibrium_payoff(random_matrix(rng, m, m), qprime);
    const Vector q = conserva::embed_orthant_equilibrium(qprime);
    const Matrix b = conserva::chart_field_matrix(sys);

    SUBCASE("zero at the equilibrium image") {
      const Vector u_star = conserva::simplex_to_chart(q);
      CHECK(conserva::chart_field(b, q, u_star).cwiseAbs().maxCoeff() < 1e-12);
    }

    for (int i = 0; i < 20; ++i) {
      const Vector u = rng.uniform_vector(m, -3.0, 3.0);
      const Vector pushed = conserva::chart_jacobian(u) * conserva::chart_field(b, q, u);
      const Vector direct = replicator_field(sys, conserva::chart_to_simplex(u));
      CHECK((pushed - direct).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("scaled chart field is the plain field times 1 + sum of exponentials") {
  conserva::Rng rng(37);
  const int m = 3;
  const Matrix b = random_matrix(rng, m, m);
  const Vector q = random_interior_simplex(rng, m + 1);

  const Vector at_zero = conserva::chart_field(b, q, Vector::Zero(m));
  const Vector scaled_zero = conserva::scaled_chart_field(b, q, Vector::Zero(m));
  CHECK((scaled_zero - double(m + 1) * at_zero).cwiseAbs().maxCoeff() < 1e-12);

  for (int i = 0; i < 10; ++i) {
    const Vector u = rng.uniform_vector(m, -2.0, 2.0);
    double s = 1.0;
    for (int k = 0; k < m; ++k) s += std::exp(u(k));
    const Vector lhs = conserva::scaled_chart_field(b, q, u);
    const Vector rhs = s * conserva::chart_field(b, q, u);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("replicator and Lotka-Volterra embeddings invert each other") {
  const LotkaVolterraSystem pp(classic_predator_prey(), (Vector(2) << -1, 1).finished());
  const ReplicatorSystem embedded = lv_to_replicator(pp);
  Matrix expected(3, 3);
  expected << 0, 1, -1, -1, 0, 1, 0, 0, 0;
  CHECK((embedded.payoff() - expected).cwiseAbs().maxCoeff() == 0.0);

  const LotkaVolterraSystem back = replicator_to_lv(embedded);
  CHECK((back.interaction() - pp.interaction()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.growth() - pp.growth()).cwiseAbs().maxCoeff() == 0.0);

  conserva::Rng rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    const int m = rng.uniform_int(1, 4);
    const LotkaVolterraSystem lv(random_matrix(rng, m, m), rng.uniform_vector(m, -2, 2));
    const LotkaVolterraSystem rt = replicator_to_lv(lv_to_replicator(lv));
    CHECK((rt.interaction() - lv.interaction()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((rt.growth() - lv.growth()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("orthant map round trip and push-forward with time rescaling") {
  conserva::Rng rng(43);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = rng.uniform_int(2, 6);
    const ReplicatorSystem sys{random_matrix(rng, n, n)};
    const LotkaVolterraSystem lv = replicator_to_lv(sys);

    for (int i = 0; i < 20; ++i) {
      const Vector x = random_interior_simplex(rng, n);
      const Vector y = conserva::simplex_to_orthant(x);
      CHECK((conserva::orthant_to_simplex(y) - x).cwiseAbs().maxCoeff() < 1e-12);

      // Jacobian of y_i = x_i / x_n: d/dx_j = delta_ij / x_n, d/dx_n = -x_i/x_n^2.
      Matrix jac = Matrix::Zero(n - 1, n);
      for (int r = 0; r < n - 1; ++r) {
        jac(r, r) = 1.0 / x(n - 1);
        jac(r, n - 1) = -x(r) / (x(n - 1) * x(n - 1));
      }
      const Vector pushed = jac * replicator_field(sys, x);
      const Vector scaled = x(n - 1) * lv_field(lv, y);
      CHECK((pushed - scaled).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("chart identity between the constant matrix and the state-dependent structure") {
  conserva::Rng rng(47);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = rng.uniform_int(2, 6);
    const ReplicatorSystem sys{random_matrix(rng, n, n)};
    const Matrix b = conserva::chart_field_matrix(sys);
    for (int i = 0; i < 10; ++i) {
      const Vector u = rng.uniform_vector(n - 1, -3.0, 3.0);
      const Matrix j = conserva::chart_jacobian(u);
      const Matrix lhs = j * b * j.transpose();
      const Matrix rhs = interaction_bivector(sys, conserva::chart_to_simplex(u));
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("projective transform") {
  conserva::Rng rng(53);
  const ReplicatorSystem sys{random_matrix(rng, 4, 4)};

  SUBCASE("unit weights are the identity") {
    const auto t = conserva::projective_transform(sys, Vector::Ones(4));
    CHECK((t.system.payoff() - sys.payoff()).cwiseAbs().maxCoeff() == 0.0);
    const Vector x = random_interior_simplex(rng, 4);
    CHECK((t.apply(x) - x).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("positive weights push the field forward up to a positive time change") {
    for (int trial = 0; trial < 3; ++trial) {
      const Vector c = rng.uniform_vector(4, 0.3, 3.0);
      const auto t = conserva::projective_transform(sys, c);
      for (int i = 0; i < 20; ++i) {
        const Vector x = random_interior_simplex(rng, 4);
        const double s = c.dot(x);
        // Jacobian of x -> c.*x / (c.x).
        Matrix jac(4, 4);
        for (int r = 0; r < 4; ++r)
          for (int k = 0; k < 4; ++k)
            jac(r, k) = (r == k ? c(r) / s : 0.0) - c(r) * x(r) * c(k) / (s * s);
        const Vector pushed = jac * replicator_field(sys, x);
        const Vector xbar = t.apply(x);
        const double factor = 1.0 / xbar.cwiseQuotient(c).sum();
        const Vector target = factor * replicator_field(t.system, xbar);
        CHECK((pushed - target).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }
  SUBCASE("weights reciprocal to an interior point send it to the center") {
    const Vector q = random_interior_simplex(rng, 4);
    const auto t = conserva::projective_transform(sys, q.cwiseInverse());
    CHECK((t.apply(q) - Vector::Constant(4, 0.25)).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK_THROWS_AS(conserva::projective_transform(sys, Vector::Zero(4)),
                  std::invalid_argument);
}

TEST_CASE("face restriction agrees with the full flow on invariant faces") {
  conserva::Rng rng(59);
  const ReplicatorSystem sys{random_matrix(rng, 5, 5)};

  SUBCASE("keeping everything changes nothing") {
    const ReplicatorSystem same = conserva::restrict_to_face(sys, {0, 1, 2, 3, 4});
    CHECK((same.payoff() - sys.payoff()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("field agreement on a three-strategy face") {
    const std::vector<int> kept = {0, 2, 4};
    const ReplicatorSystem face = conserva::restrict_to_face(sys, kept);
    for (int i = 0; i < 10; ++i) {
      const Vector xf = random_interior_simplex(rng, 3);
      Vector x = Vector::Zero(5);
      for (size_t k = 0; k < kept.size(); ++k) x(kept[k]) = xf(int(k));
      const Vector full = replicator_field(sys, x);
      const Vector small = replicator_field(face, xf);
      for (size_t k = 0; k < kept.size(); ++k)
        CHECK(std::abs(full(kept[k]) - small(int(k))) < 1e-12);
    }
  }
  SUBCASE("a single kept strategy is a frozen vertex") {
    const ReplicatorSystem vertex = conserva::restrict_to_face(sys, {1});
    CHECK(vertex.strategies() == 1);
    CHECK(replicator_field(vertex, Vector::Ones(1)).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(conserva::restrict_to_face(sys, {}), std::invalid_argument);
}
