#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "wiretap/capacity.hpp"
#include "wiretap/errors.hpp"
#include "wiretap/harness.hpp"

using namespace wiretap;

namespace {
const double kCNs0 = 0.2110814521389986;
const double kSat = 0.5310044064107188;
const double kSatRf = 0.3199229542717202;
const double kCSq01 = 0.6812587081239994;
const double kCSq001 = 0.3771598438599976;
const double kCSq05 = 0.5518813690838217;
}  // namespace

TEST_CASE("closed forms hit the reference values") {
  BscScenario scn;
  CHECK(bsc_nostate_capacity(scn, 0.0) == doctest::Approx(kCNs0).epsilon(1e-12));
  CHECK(bsc_nostate_capacity(scn, kSatRf) == doctest::Approx(kSat).epsilon(1e-12));
  CHECK(bsc_nostate_capacity(scn, 0.9) == doctest::Approx(kSat).epsilon(1e-12));
  CHECK(bsc_nostate_capacity(scn, 0.2) < kSat);

  for (double rf : {0.0, 0.1, 0.32, 0.7, 1.0}) {
    CHECK(bsc_state_capacity(scn, rf) == doctest::Approx(kCSq01).epsilon(1e-12));
  }
  BscScenario low = scn;
  low.q = 0.01;
  CHECK(bsc_state_capacity(low, 0.0) == doctest::Approx(kCSq001).epsilon(1e-12));
  BscScenario half = scn;
  half.q = 0.5;
  CHECK(bsc_state_capacity(half, 0.0) == doctest::Approx(kCSq05).epsilon(1e-12));

  CHECK_THROWS_AS(bsc_state_capacity(scn, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(bsc_nostate_capacity(scn, -1e-9), std::invalid_argument);
}

TEST_CASE("single-letter terms at the symmetric policy") {
  BscScenario scn;
  WiretapSystem sys = make_state_bsc(scn, true);
  InputPolicy pol = InputPolicy::uniform(2, 2);
  InfoTerms t = info_terms(sys, pol);
  // I(X;Y|S) = 1 - 0.9 h(0.05) - 0.1 h(0.15)
  CHECK(t.i_xy_s == doctest::Approx(kCSq01).epsilon(1e-12));
  // uniform input makes Z independent of S, so H(S|Z) = H(S) = h(0.1)
  CHECK(t.h_s_z == doctest::Approx(binary_entropy(0.1)).epsilon(1e-12));
  CHECK(t.i_xz_s > 0.0);
  CHECK(t.i_xy_s > t.i_xz_s);  // eavesdropper strictly noisier
  // degraded system: I(X;Y|Z,S) = I(X;Y|S) - I(X;Z|S)
  CHECK(t.i_xy_zs == doctest::Approx(t.i_xy_s - t.i_xz_s).epsilon(1e-10));
}

TEST_CASE("identity auxiliary reproduces the policy terms") {
  BscScenario scn;
  WiretapSystem sys = make_state_bsc(scn, true);
  AuxPolicy aux = AuxPolicy::identity(Pmf::uniform(2), 2);
  LowerBoundResult lb = lower_bound(sys, aux, 0.0);
  CHECK(lb.r_hat2 == doctest::Approx(kCSq01).epsilon(1e-10));
  CHECK(lb.branch2_valid);  // U' drawn independently of S
  // branch 1 exceeds branch 2 here, so the min picks branch 2 = capacity
  CHECK(lb.r_hat1 > lb.r_hat2);
  CHECK(lb.value == doctest::Approx(kCSq01).epsilon(1e-10));
  CHECK(lb.value == doctest::Approx(bsc_state_capacity(scn, 0.0)).epsilon(1e-9));
}

TEST_CASE("optimizer matches the closed forms") {
  BscScenario scn;
  WiretapSystem sys = make_state_bsc(scn, true);
  WiretapSystem flat = make_state_bsc(scn, false);
  OptimizeOptions oo;
  oo.resolution = 1e-3;
  double tol = 2e-3 + 1e-6;
  for (double rf : {0.0, 0.1, 0.5}) {
    BoundReport b = optimize(sys, rf, Objective::corollary, oo);
    CHECK(b.lower == doctest::Approx(bsc_state_capacity(scn, rf)).epsilon(tol));
    CHECK(b.upper >= b.lower - 1e-9);
    CHECK(std::abs(b.upper - b.lower) <= 1e-3);  // degraded: bounds meet
  }
  for (double rf : {0.0, 0.2, 0.4}) {
    BoundReport b = optimize(flat, rf, Objective::corollary, oo);
    CHECK(b.lower == doctest::Approx(bsc_nostate_capacity(scn, rf)).epsilon(tol));
  }
}

TEST_CASE("corollary capacity demands a degradedness certificate") {
  Channel main = Channel::from_rows({{0.9, 0.1}, {0.1, 0.9}});
  Channel eve = Channel::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  WiretapSystem sharp(Pmf::uniform(1), 2, main, GeneralEve{eve});
  CHECK_THROWS_AS(corollary_capacity(sharp, 0.1), NotDegraded);

  BscScenario scn;
  WiretapSystem sys = make_state_bsc(scn, true);
  CHECK(corollary_capacity(sys, 0.0) ==
        doctest::Approx(bsc_state_capacity(scn, 0.0)).epsilon(2e-3 + 1e-6));
}

TEST_CASE("upper bound dominates lower bound across random systems") {
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    WiretapSystem sys =
        t % 2 == 0 ? random_degraded_system(rng) : random_general_system(rng);
    double rf = 0.4 * rng.uniform01();
    OptimizeOptions oo;
    oo.resolution = 5e-3;
    BoundReport lo = optimize(sys, rf, Objective::lower, oo);
    BoundReport hi = optimize(sys, rf, Objective::upper, oo);
    CHECK(hi.upper >= lo.lower - 1e-9);
    CHECK(lo.lower >= -1e-12);
    CHECK(lo.r_hat2 >= 0.0);
  }
}

TEST_CASE("special cases enforce their structural hypotheses") {
  BscScenario scn;
  WiretapSystem sys = make_state_bsc(scn, true);     // state-dependent
  WiretapSystem flat = make_state_bsc(scn, false);   // |S| = 1

  CHECK_THROWS_AS(special_case(sys, 0.1, SpecialCase::feedback_only),
                  StructuralAssumptionViolated);
  CHECK_THROWS_AS(special_case(sys, 0.1, SpecialCase::output_feedback),
                  StructuralAssumptionViolated);
  // decoder-only CSI needs enough feedback to describe the state
  CHECK_THROWS_AS(special_case(sys, 0.01, SpecialCase::decoder_only_csi),
                  StructuralAssumptionViolated);

  Channel main = Channel::from_rows({{0.9, 0.1}, {0.1, 0.9}});
  Channel eve = Channel::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  WiretapSystem sharp(Pmf::uniform(1), 2, main, GeneralEve{eve});
  CHECK_THROWS_AS(special_case(sharp, 0.1, SpecialCase::degraded_no_state),
                  NotDegraded);
}

TEST_CASE("special-case values agree with their base quantities") {
  BscScenario scn;
  WiretapSystem flat = make_state_bsc(scn, false);
  WiretapSystem sys = make_state_bsc(scn, true);
  OptimizeOptions oo;
  oo.resolution = 1e-3;
  double tol = 2e-3 + 1e-6;

  for (double rf : {0.0, 0.15, 0.4}) {
    double v = special_case(flat, rf, SpecialCase::feedback_only, oo);
    CHECK(v == doctest::Approx(bsc_nostate_capacity(scn, rf)).epsilon(tol));
    CHECK(v == doctest::Approx(optimize(flat, rf, Objective::upper, oo).upper)
                   .epsilon(1e-9));
  }

  double nf = special_case(sys, 0.0, SpecialCase::no_feedback, oo);
  CHECK(nf == doctest::Approx(optimize(sys, 0.0, Objective::lower, oo).lower)
                  .epsilon(1e-9));

  double dg = special_case(flat, 0.0, SpecialCase::degraded_no_state, oo);
  CHECK(dg == doctest::Approx(bsc_nostate_capacity(scn, 0.0)).epsilon(tol));
}

TEST_CASE("decoder-only CSI marginalization identity") {
  Rng rng(99);
  IdentityCheckReport rep = identity_check_decoder_only_csi(30, rng);
  CHECK(rep.trials == 30);
  CHECK(rep.violations == 0);
  CHECK(rep.max_deviation <= 1e-10);
}

TEST_CASE("auxiliary search never loses to the identity embedding") {
  BscScenario scn;
  WiretapSystem sys = make_state_bsc(scn, true);
  AuxPolicy ident = AuxPolicy::identity(Pmf::uniform(2), 2);
  double base = lower_bound(sys, ident, 0.0).value;
  AuxSearchOptions so;
  so.budget = 20000;
  AuxSearchResult res = search_aux_lower_bound(sys, 0.0, so);
  CHECK(res.result.value >= base - 1e-9);
  CHECK(res.evaluations > 0);
  CHECK(res.evaluations <= so.budget);
}

TEST_CASE("per-state auxiliary embedding reproduces the policy law") {
  std::vector<Pmf> rows;
  rows.push_back(Pmf({0.7, 0.3}));
  rows.push_back(Pmf({0.2, 0.8}));
  InputPolicy pol{rows};
  BscScenario scn;
  WiretapSystem sys = make_state_bsc(scn, true);
  AuxPolicy aux = AuxPolicy::per_state(pol);
  CHECK(aux.aux_size() == 4);  // binary symbol chosen per state
  JointPmf j = aux_joint(sys, aux);
  // p(x=0 | s) must match the policy rows after marginalizing the auxiliary
  JointPmf sx = j.marginal({0, 3});
  double p_s0 = sx.at({0, 0}) + sx.at({0, 1});
  CHECK(sx.at({0, 0}) / p_s0 == doctest::Approx(0.7).epsilon(1e-12));
  double p_s1 = sx.at({1, 0}) + sx.at({1, 1});
  CHECK(sx.at({1, 0}) / p_s1 == doctest::Approx(0.2).epsilon(1e-12));
  InfoTerms t = info_terms(sys, aux);
  InfoTerms tp = info_terms(sys, pol);
  CHECK(t.i_uy_s == doctest::Approx(tp.i_xy_s).epsilon(1e-10));
}
