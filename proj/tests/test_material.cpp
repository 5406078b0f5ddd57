#include "doctest.h"

#include <cmath>

#include "thermobem/errors.hpp"
#include "thermobem/material.hpp"

using namespace thermobem;

TEST_SUITE_BEGIN("material");

TEST_CASE("validator accepts admissible constants") {
    Material m = validate_material(1, 1, 1, 1, 1, 1);
    CHECK(m.rho == 1.0);
    // negative lambda is fine while 3*lambda + 2*mu stays positive
    CHECK_NOTHROW(validate_material(1, -0.5, 1, 1, 1, 1));
    CHECK_THROWS_AS(validate_material(1, -1, 1, 1, 1, 1), ConstraintViolation);
}

TEST_CASE("validator names the first failed inequality") {
    CHECK_THROWS_WITH_AS(validate_material(0, 1, 1, 1, 1, 1),
                         "ConstraintViolation: rho > 0", ConstraintViolation);
    CHECK_THROWS_WITH_AS(validate_material(1, 1, 1, -1, 1, 1),
                         "ConstraintViolation: gamma/eta > 0", ConstraintViolation);
    CHECK_THROWS_AS(validate_material(1, -1, 0.5, 1, 1, 1), ConstraintViolation);
    CHECK_THROWS_AS(validate_material(1, 1, 1, 1, 1, 0), ConstraintViolation);
    CHECK_THROWS_AS(validate_material(1, 1, 1, 1, 1, std::nan("")), ConstraintViolation);
}

TEST_CASE("derived constants") {
    DerivedConstants d = derive_constants(validate_material(1, 1, 1, 1, 1, 1));
    CHECK(d.epsilon == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(d.c_s == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d.c_p == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
    CHECK(!d.epsilon_warning);

    // zero coupling: decoupled materials are built directly, not validated
    Material dec{1, 1, 1, 0, 0, 1};
    CHECK(derive_constants(dec).epsilon == 0.0);

    // (lambda, mu) = (2, 1), gamma*eta*kappa = 4 -> epsilon = 1, flagged
    DerivedConstants big = derive_constants(validate_material(1, 2, 1, 2, 2, 1));
    CHECK(big.epsilon == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(big.epsilon_warning);
}

TEST_CASE("epsilon is invariant under gamma -> c gamma, eta -> eta/c") {
    for (double c : {0.5, 2.0, 17.0}) {
        Material m1 = validate_material(1.2, 0.7, 1.1, 0.9, 1.3, 0.8);
        Material m2 = validate_material(1.2, 0.7, 1.1, 0.9 * c, 1.3 / c, 0.8);
        const double e1 = derive_constants(m1).epsilon;
        const double e2 = derive_constants(m2).epsilon;
        CHECK(e1 == doctest::Approx(e2).epsilon(1e-14));
    }
}

TEST_CASE("validate then derive is bitwise deterministic") {
    Material a = validate_material(1.2, 0.7, 1.1, 0.9, 1.3, 0.8);
    Material b = validate_material(1.2, 0.7, 1.1, 0.9, 1.3, 0.8);
    CHECK(derive_constants(a).epsilon == derive_constants(b).epsilon);
    CHECK(derive_constants(a).c_p == derive_constants(b).c_p);
}

TEST_CASE("json round trip") {
    Material m = validate_material(2.5, 0.25, 1.75, 0.5, 0.125, 3.0);
    Material back = material_from_json(material_to_json(m));
    CHECK(back.rho == m.rho);
    CHECK(back.lambda == m.lambda);
    CHECK(back.kappa == m.kappa);
    CHECK_THROWS_AS(material_from_json("{\"rho\":1}"), ConstraintViolation);
}

TEST_SUITE_END();
