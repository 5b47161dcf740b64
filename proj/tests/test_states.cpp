#include <doctest.h>

#include "unravel/states.hpp"

using namespace unravel;

TEST_CASE("pauli expectations on reference states") {
    const PureState down = PureState::ground();
    CHECK(expectation(down, Observable::SigmaZ) == doctest::Approx(-1.0));
    CHECK(expectation(down, Observable::SigmaX) == doctest::Approx(0.0));

    // (|down> + i|up>)/sqrt(2) is a sigma_y eigenstate with eigenvalue +1
    PureState sy_plus;
    sy_plus.down = 1.0 / std::sqrt(2.0);
    sy_plus.up = cplx(0.0, 1.0) / std::sqrt(2.0);
    CHECK(expectation(sy_plus, Observable::SigmaY) == doctest::Approx(1.0));
    CHECK(expectation(sy_plus, Observable::SigmaZ) == doctest::Approx(0.0).epsilon(1e-12));

    const MixedState mm = MixedState::maximally_mixed();
    CHECK(expectation(mm, Observable::SigmaX) == doctest::Approx(0.0));
    CHECK(expectation(mm, Observable::SigmaY) == doctest::Approx(0.0));
    CHECK(expectation(mm, Observable::SigmaZ) == doctest::Approx(0.0));
    CHECK(mm.purity() == doctest::Approx(0.5));
}

TEST_CASE("pure/mixed agreement and bloch round trip") {
    PureState s;
    s.up = cplx(0.3, 0.4);
    s.down = cplx(0.5, -0.2);
    s.normalize();
    const MixedState rho = MixedState::from_pure(s);
    for (auto obs : {Observable::SigmaX, Observable::SigmaY, Observable::SigmaZ}) {
        CHECK(expectation(rho, obs) == doctest::Approx(expectation(s, obs)).epsilon(1e-12));
    }
    CHECK(std::abs(expectation_complex(rho, Observable::SigmaMinus) -
                   expectation_complex(s, Observable::SigmaMinus)) < 1e-12);
    CHECK(rho.purity() == doctest::Approx(1.0));
    CHECK(s.bloch().norm_sq() == doctest::Approx(1.0));

    const MixedState back = MixedState::from_bloch(rho.bloch());
    CHECK(back.hermiticity_defect() < 1e-14);
    CHECK(back.min_eigenvalue() > -1e-12);
    back.require_valid();
}

TEST_CASE("mixed-state validity checks reject junk") {
    MixedState bad = MixedState::ground();
    bad.rho[0][0] = 0.4; // trace 1.4
    CHECK_THROWS_AS(bad.require_valid(), param_error);

    MixedState neg = MixedState::from_bloch({1.2, 0.0, 0.0}); // outside the sphere
    CHECK_THROWS_AS(neg.require_valid(), param_error);
}

TEST_CASE("params: Y and omega stay consistent") {
    const SystemParams p = SystemParams::from_drive_strength(10.0);
    CHECK(p.drive_strength() == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(p.omega == doctest::Approx(10.0 / (2.0 * std::sqrt(2.0))));
    CHECK(steady_state_inversion(p) == doctest::Approx(-1.0 / 101.0));

    SystemParams bad = p;
    bad.efficiency = 1.5;
    CHECK_THROWS_AS(bad.validate(), param_error);
    bad = p;
    bad.dt = 0.0;
    CHECK_THROWS_AS(bad.validate(), param_error);
}
