#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "nlspec/experiments.hpp"

using nlspec::Kernel;
using nlspec::Mesh;
using nlspec::Pencil;
using nlspec::PerturbationMode;
using nlspec::Spectrum;
using nlspec::Weight;
using nlspec::WeightForm;
using nlspec::ZeroSetClass;

TEST_CASE("continuity sweep") {
  const Kernel k = Kernel::fractional(0.25);
  const Mesh m(-1.0, 1.0, 12);
  const Weight one = Weight::constant(m, 1.0);

  SECTION("uniform shifts of the constant weight") {
    const auto rep = nlspec::continuity_sweep(k, m, one, {0.1, 0.05, 0.025},
                                              PerturbationMode::UniformShift, 4, 0);
    CHECK(rep.slack_ok);
    CHECK(rep.shrink_checked);
    CHECK(rep.shrink_ok);
    REQUIRE_FALSE(rep.rows.empty());
    for (const auto& row : rep.rows) CHECK(row.slack >= -1e-10);

    // scaling cross-check: lambda_1(1 + eps) = lambda_1(1) / (1 + eps), i.e.
    // mu_1(1 + eps) = (1 + eps) mu_1(1)
    const Eigen::MatrixXd A = nlspec::assemble_stiffness(k, m);
    const Spectrum base = nlspec::solve_spectrum(Pencil(A, nlspec::assemble_weight(one, m)));
    for (const auto& row : rep.rows) {
      if (row.k != 1) continue;
      CHECK_THAT(row.mu_perturbed,
                 Catch::Matchers::WithinRel((1.0 + row.eps) * base.mu(1), 1e-10));
    }
  }

  SECTION("a zero perturbation produces zero deviation and zero distance") {
    // eps = 0 is rejected as an input; the identity case is checked directly
    const Eigen::MatrixXd A = nlspec::assemble_stiffness(k, m);
    const Pencil P(A, nlspec::assemble_weight(one, m));
    CHECK(nlspec::operator_distance(P, P) == 0.0);
    CHECK_THROWS_AS(nlspec::continuity_sweep(k, m, one, {0.1, 0.0},
                                             PerturbationMode::UniformShift, 4, 0),
                    std::invalid_argument);
  }

  SECTION("random-cell mode is reproducible for a fixed seed") {
    const Weight rho = Weight::from_expr(m, "sign_split");
    const auto r1 = nlspec::continuity_sweep(k, m, rho, {0.08, 0.04},
                                             PerturbationMode::RandomCells, 3, 2024);
    const auto r2 = nlspec::continuity_sweep(k, m, rho, {0.08, 0.04},
                                             PerturbationMode::RandomCells, 3, 2024);
    REQUIRE(r1.rows.size() == r2.rows.size());
    for (std::size_t i = 0; i < r1.rows.size(); ++i) {
      CHECK(r1.rows[i].deviation == r2.rows[i].deviation);
      CHECK(r1.rows[i].distance == r2.rows[i].distance);
    }
    const auto r3 = nlspec::continuity_sweep(k, m, rho, {0.08, 0.04},
                                             PerturbationMode::RandomCells, 3, 2025);
    bool all_equal = r1.rows.size() == r3.rows.size();
    if (all_equal)
      for (std::size_t i = 0; i < r1.rows.size(); ++i)
        all_equal = all_equal && r1.rows[i].distance == r3.rows[i].distance;
    CHECK_FALSE(all_equal);
  }

  SECTION("a shift cancelling the whole weight is flagged and skipped") {
    const Weight flat = Weight::constant(m, 0.5);
    const auto rep = nlspec::continuity_sweep(k, m, flat, {-0.5, -0.25},
                                              PerturbationMode::UniformShift, 2, 0);
    REQUIRE(rep.skipped_steps.size() == 1);
    CHECK(rep.skipped_steps[0] == 0);
  }
}

TEST_CASE("weight comparison and monotonicity") {
  const Kernel k = Kernel::fractional(0.25);
  const Mesh m(-1.0, 1.0, 12);
  const Weight one = Weight::constant(m, 1.0);

  SECTION("doubling the weight halves every eigenvalue, strictly") {
    const auto rep = nlspec::compare_weights(k, m, one, one.scaled(2.0), 4);
    CHECK(rep.weak_ok);
    REQUIRE_FALSE(rep.rows.empty());
    for (const auto& row : rep.rows) {
      CHECK(row.strict);
      CHECK_THAT(row.lambda_shifted, Catch::Matchers::WithinRel(row.lambda_base / 2.0, 1e-10));
    }
  }

  SECTION("a single-cell bump moves the low eigenvalues strictly") {
    const Weight bumped = one.shifted_on({6}, 1.0);
    const auto rep = nlspec::compare_weights(k, m, one, bumped, 2);
    CHECK(rep.weak_ok);
    REQUIRE(rep.rows.size() == 2);
    for (const auto& row : rep.rows) {
      CHECK(row.strict);
      CHECK(row.gap > 0.0);
      CHECK(row.zero_fraction == 0.0);  // the pure-kernel eigenfunctions do not vanish
    }
  }

  SECTION("equal weights are rejected") {
    CHECK_THROWS_WITH(nlspec::compare_weights(k, m, one, one, 2),
                      "weights not comparable or equal");
  }

  SECTION("misordered weights are rejected") {
    CHECK_THROWS_WITH(nlspec::compare_weights(k, m, one, one.shifted_on({3}, -0.5), 2),
                      "weights not comparable or equal");
  }

  SECTION("negative branch rows carry the mirrored order") {
    const Weight minus = Weight::constant(m, -1.0);
    const auto rep = nlspec::compare_weights(k, m, minus.scaled(2.0), minus, 3);
    CHECK(rep.weak_ok);
    bool saw_negative = false;
    for (const auto& row : rep.rows) {
      REQUIRE(row.k < 0);
      saw_negative = true;
      CHECK(row.gap >= -1e-10);
    }
    CHECK(saw_negative);
  }

  SECTION("weak monotonicity holds for random ordered pairs on both branches") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> bump(0.0, 0.8);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> base(m.cell_count()), upper(m.cell_count());
      for (int c = 0; c < m.cell_count(); ++c) {
        base[c] = u(rng);
        upper[c] = base[c] + (rng() & 1 ? bump(rng) : 0.0);
      }
      upper[trial % m.cell_count()] += 0.1;  // guarantee a strict bump somewhere
      const auto rep = nlspec::compare_weights(k, m, Weight::from_cells(m, base),
                                               Weight::from_cells(m, upper), 8);
      CHECK(rep.weak_ok);
    }
  }
}

TEST_CASE("discrete zero sets") {
  SECTION("first eigenfunction of the pure kernel has no zero cells") {
    const Mesh m(-1.0, 1.0, 16);
    const Eigen::MatrixXd A = nlspec::assemble_stiffness(Kernel::fractional(0.5), m);
    const Spectrum s =
        nlspec::solve_spectrum(Pencil(A, nlspec::assemble_weight(Weight::constant(m, 1.0), m)));
    const auto rep = nlspec::zero_set(s, m, 1, 1e-6);
    CHECK(rep.zero_cells.empty());
    CHECK(rep.measure == 0.0);
    CHECK(rep.classification == ZeroSetClass::Nonvanishing);

    // sign constancy of the first eigenfunction
    const Eigen::VectorXd e1 = s.eigenvector(1);
    CHECK((e1.array() > 0.0).all() != (e1.array() < 0.0).all());
  }

  SECTION("tau = 1 flags every cell") {
    const Mesh m(-1.0, 1.0, 8);
    const Eigen::MatrixXd A = nlspec::assemble_stiffness(Kernel::fractional(0.5), m);
    const Spectrum s =
        nlspec::solve_spectrum(Pencil(A, nlspec::assemble_weight(Weight::constant(m, 1.0), m)));
    const auto rep = nlspec::zero_set(s, m, 1, 1.0);
    CHECK(static_cast<int>(rep.zero_cells.size()) == m.cell_count());
    CHECK_THAT(rep.measure, Catch::Matchers::WithinRel(2.0, 1e-12));
  }

  SECTION("measure is monotone in tau") {
    const Mesh m(-1.0, 1.0, 16);
    const Eigen::MatrixXd A = nlspec::assemble_stiffness(Kernel::fractional(0.25), m);
    const Spectrum s =
        nlspec::solve_spectrum(Pencil(A, nlspec::assemble_weight(Weight::constant(m, 1.0), m)));
    double prev = -1.0;
    for (double tau : {1e-8, 1e-4, 1e-2, 0.3, 0.8, 1.0}) {
      const auto rep = nlspec::zero_set(s, m, 5, tau);
      CHECK(rep.measure >= prev);
      CHECK(rep.measure <= m.b - m.a);
      prev = rep.measure;
    }
  }

  SECTION("block-decoupled surrogate: eigenfunction vanishes on the other block") {
    const Mesh m(0.0, 1.0, 8);
    const Eigen::MatrixXd A = nlspec::block_second_difference({4, 4}, m.spacing());
    const Weight one = Weight::constant(m, 1.0);
    const Spectrum s = nlspec::solve_spectrum(Pencil(A, nlspec::assemble_weight_lumped(one, m)));
    const auto rep = nlspec::zero_set(s, m, 1, 1e-6);
    // the first eigenfunction lives on block one; block two spans four cells
    CHECK_THAT(rep.measure, Catch::Matchers::WithinRel(4.0 * m.spacing(), 1e-12));
    CHECK(rep.classification == ZeroSetClass::PositiveMeasure);
  }

  SECTION("an interior plateau classifies as an open zero set") {
    const Mesh m(0.0, 1.0, 9);
    Spectrum s;
    s.mu_pos = {1.0};
    s.lambda_pos = {1.0};
    s.residual_pos = {0.0};
    s.vectors_pos = Eigen::MatrixXd::Zero(9, 1);
    for (int i : {0, 1, 6, 7, 8}) s.vectors_pos(i, 0) = 1.0;  // zero at nodes 2..5
    const auto rep = nlspec::zero_set(s, m, 1, 1e-9);
    REQUIRE(rep.zero_cells == std::vector<int>{3, 4, 5});
    CHECK(rep.classification == ZeroSetClass::OpenSet);
  }

  SECTION("argument validation") {
    const Mesh m(0.0, 1.0, 4);
    Spectrum s;
    s.mu_pos = {1.0};
    s.lambda_pos = {1.0};
    s.residual_pos = {0.0};
    s.vectors_pos = Eigen::MatrixXd::Ones(4, 1);
    CHECK_THROWS_AS(nlspec::zero_set(s, m, 1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(nlspec::zero_set(s, m, 1, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(nlspec::zero_set(s, m, 2, 0.5), std::out_of_range);
  }
}

TEST_CASE("weight edit on the zero set") {
  const Mesh m(0.0, 1.0, 8);
  const Eigen::MatrixXd A = nlspec::block_second_difference({4, 4}, m.spacing());

  SECTION("positive branch: the edited weight keeps lambda_1") {
    const Weight one = Weight::constant(m, 1.0);
    const auto rep = nlspec::rev_construct(A, m, one, 1, 0.5, 1e-6, WeightForm::Lumped);
    CHECK(rep.pass);
    CHECK(rep.index_stable);
    CHECK(rep.weight_changed);
    CHECK(rep.difference <= 1e-10);
    CHECK(rep.coupling_residual <= 1e-14);
    // the edit only raises the weight
    for (int c = 0; c < m.cell_count(); ++c) CHECK(rep.rho_eps.cells[c] >= one.cells[c]);
    bool changed = false;
    for (int c = 0; c < m.cell_count(); ++c)
      changed = changed || rep.rho_eps.cells[c] != one.cells[c];
    CHECK(changed);
  }

  SECTION("negative branch mirror with a negative edit") {
    const Weight minus = Weight::constant(m, -1.0);
    const auto rep = nlspec::rev_construct(A, m, minus, -1, -0.5, 1e-6, WeightForm::Lumped);
    CHECK(rep.pass);
    CHECK(rep.index_stable);
    CHECK(rep.difference <= 1e-10);
    for (int c = 0; c < m.cell_count(); ++c) CHECK(rep.rho_eps.cells[c] <= minus.cells[c]);
  }

  SECTION("the pure-kernel pencil has no usable zero set") {
    const Mesh mf(-1.0, 1.0, 16);
    const Eigen::MatrixXd Af = nlspec::assemble_stiffness(Kernel::fractional(0.5), mf);
    const Weight one = Weight::constant(mf, 1.0);
    CHECK_THROWS_WITH(
        nlspec::rev_construct(Af, mf, one, 1, 0.5, 1e-6, WeightForm::Consistent),
        Catch::Matchers::ContainsSubstring("construction inapplicable"));
  }

  SECTION("epsilon sign must match the branch") {
    const Weight one = Weight::constant(m, 1.0);
    CHECK_THROWS_AS(nlspec::rev_construct(A, m, one, 1, -0.5, 1e-6), std::invalid_argument);
    CHECK_THROWS_AS(nlspec::rev_construct(A, m, one, -1, -0.5, 1e-6), std::out_of_range);
    CHECK_THROWS_AS(nlspec::rev_construct(A, m, one, 0, 0.5, 1e-6), std::invalid_argument);
  }

  SECTION("an oversized edit that crosses the next eigenvalue is refused") {
    // block two starts at twice the block-one scale; a large positive edit on
    // block two drags lambda_2(rho_eps) below lambda_1(rho)
    const Weight one = Weight::constant(m, 1.0);
    CHECK_THROWS_WITH(nlspec::rev_construct(A, m, one, 1, 30.0, 1e-6),
                      Catch::Matchers::ContainsSubstring("crossing"));
  }

  SECTION("degenerate target is refused") {
    // equal block scales duplicate every eigenvalue
    const Eigen::MatrixXd Adeg = nlspec::block_second_difference({4, 4}, m.spacing(), {1.0, 1.0});
    const Weight one = Weight::constant(m, 1.0);
    CHECK_THROWS_WITH(nlspec::rev_construct(Adeg, m, one, 1, 0.5, 1e-6),
                      Catch::Matchers::ContainsSubstring("degenerate"));
  }
}

TEST_CASE("index stability of the unchanged eigenvalue") {
  const Mesh m(0.0, 1.0, 10);
  const Eigen::MatrixXd A = nlspec::block_second_difference({5, 5}, m.spacing());
  const Weight one = Weight::constant(m, 1.0);
  // k = 2 sits on block two (scaled by 2): its eigenfunction vanishes on block one
  const Spectrum s = nlspec::solve_spectrum(Pencil(A, nlspec::assemble_weight_lumped(one, m)));
  REQUIRE(s.positive_count() >= 3);
  const auto zs = nlspec::zero_set(s, m, 2, 1e-6);
  REQUIRE_FALSE(zs.zero_cells.empty());
  const auto rep = nlspec::rev_construct(A, m, one, 2, 0.25, 1e-6);
  CHECK(rep.pass);
  CHECK(rep.index_stable);
}
