#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include <fkmatch/fkmatch.h>

TEST_CASE("c api: version and error text") {
    CHECK(std::strlen(fk_version()) > 0);
    fk_process* p = nullptr;
    CHECK(fk_process_create("{\"family\":\"nope\"}", &p) == FK_ERR_INVALID_ARGUMENT);
    CHECK(std::string(fk_last_error()).find("nope") != std::string::npos);
    CHECK(fk_process_create("not json", &p) == FK_ERR_PARSE);
}

TEST_CASE("c api: marginal and joint transforms") {
    fk_process* p = nullptr;
    REQUIRE(fk_process_create("{\"family\":\"gbesq1\",\"x\":1.0,\"delta\":\"2\"}", &p) ==
            FK_OK);
    double v = 0.0;
    REQUIRE(fk_laplace_marginal(p, 1.0, 1.0, &v) == FK_OK);
    CHECK(v == doctest::Approx(std::exp(-1.0 / 3.0) / 3.0).epsilon(1e-12));

    REQUIRE(fk_joint_laplace(p, 0.0, 2.0, 5.0, &v) == FK_OK);
    CHECK(v == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));

    double drift = 0.0, diffusion = 0.0;
    REQUIRE(fk_process_coefficients(p, 0.0, 4.0, &drift, &diffusion) == FK_OK);
    CHECK(drift == doctest::Approx(2.0));
    CHECK(diffusion == doctest::Approx(4.0));

    CHECK(fk_laplace_marginal(p, 1.0, -1.0, &v) == FK_ERR_DOMAIN);
    fk_process_free(p);
}

TEST_CASE("c api: unknown keys are rejected") {
    fk_process* p = nullptr;
    CHECK(fk_process_create(
              "{\"family\":\"srou\",\"x\":1.0,\"delta\":2.0,\"alpha\":1.0,\"zz\":0}",
              &p) == FK_ERR_INVALID_ARGUMENT);
}

TEST_CASE("c api: monte carlo estimate") {
    fk_process* p = nullptr;
    REQUIRE(fk_process_create(
                "{\"family\":\"srou\",\"x\":1.0,\"delta\":2.0,\"alpha\":1.0}", &p) ==
            FK_OK);
    fk_sim_config cfg{1.0, 1e-2, 20000, 7, FK_SCHEME_AUTO};
    fk_mc_estimate est{};
    REQUIRE(fk_mc_exp_functional(p, &cfg, 1.0, 0.0, &est) == FK_OK);
    double closed = 0.0;
    REQUIRE(fk_laplace_marginal(p, 1.0, 1.0, &closed) == FK_OK);
    CHECK(std::abs(est.mean - closed) <= 5.0 * est.std_error);
    CHECK(est.n_paths == 20000);
    fk_process_free(p);
}

TEST_CASE("c api: exact besq terminal draw is deterministic") {
    double a = 0.0, b = 0.0;
    REQUIRE(fk_sample_besq_terminal(2.0, 1.0, 1.0, 42, 3, &a) == FK_OK);
    REQUIRE(fk_sample_besq_terminal(2.0, 1.0, 1.0, 42, 3, &b) == FK_OK);
    CHECK(a == b);
    CHECK(a >= 0.0);
}

TEST_CASE("c api: identity check returns a json report") {
    char* report = nullptr;
    REQUIRE(fk_check_identity("gamma_limit", nullptr, &report) == FK_OK);
    const std::string text(report);
    CHECK(text.find("\"verdict\":\"pass\"") != std::string::npos);
    fk_string_free(report);

    CHECK(fk_check_identity("bogus", nullptr, &report) == FK_ERR_INVALID_ARGUMENT);

    char* names = nullptr;
    REQUIRE(fk_identity_names(&names) == FK_OK);
    CHECK(std::string(names).find("hbp_cosh") != std::string::npos);
    fk_string_free(names);
}

TEST_CASE("c api: identity overrides validate") {
    char* report = nullptr;
    CHECK(fk_check_identity("hbp_cosh", "{\"bogus\":1}", &report) ==
          FK_ERR_INVALID_ARGUMENT);
    REQUIRE(fk_check_identity("hbp_cosh",
                              "{\"paths\":5000,\"dt\":0.005,\"seed\":11}",
                              &report) == FK_OK);
    const std::string text(report);
    CHECK(text.find("\"id\":\"hbp_cosh\"") != std::string::npos);
    fk_string_free(report);
}
