#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <fstream>

#include "ifslab/reference_systems.hpp"
#include "ifslab/system.hpp"
#include "ifslab/system_io.hpp"

using namespace ifslab;
using Catch::Approx;

TEST_CASE("probability evaluation on the reference systems") {
    IfsSystem half = make_half();
    Vec p = evaluate_probabilities(half, {0.3});
    REQUIRE(p[0] == Approx(0.5).margin(1e-15));
    REQUIRE(p[1] == Approx(0.5).margin(1e-15));

    IfsSystem tilt = make_tilt();
    p = evaluate_probabilities(tilt, {0.0});
    REQUIRE(p[0] == Approx(0.5).margin(1e-12));
    REQUIRE(p[1] == Approx(0.5).margin(1e-12));
    p = evaluate_probabilities(tilt, {1.0});
    REQUIRE(p[0] == Approx(0.75).margin(1e-12));
    REQUIRE(p[1] == Approx(0.25).margin(1e-12));
}

TEST_CASE("probability field stays on the simplex over the probe grid") {
    for (const IfsSystem& system : {make_half(), make_tilt()}) {
        for (const Vec& x : probe_lattice(system.domain_box, 1000)) {
            Vec p = evaluate_probabilities(system, x);
            double sum = 0.0;
            for (double v : p) {
                REQUIRE(v >= 0.0);
                REQUIRE(v <= 1.0);
                sum += v;
            }
            REQUIRE(std::fabs(sum - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("degenerate and non-finite fields are rejected") {
    IfsSystem zero = make_half();
    zero.field.exprs = {ProbExpr{ProbExpr::Constant{0.0}}, ProbExpr{ProbExpr::Constant{0.0}}};
    zero.field.normalization = ProbabilityField::Normalization::renormalize;
    finalize(zero);
    REQUIRE_THROWS_AS(evaluate_probabilities(zero, {0.5}), DegenerateFieldError);
}

TEST_CASE("apply_map is exact affine arithmetic") {
    IfsSystem half = make_half();
    REQUIRE(apply_map(half, 0, {0.8})[0] == Approx(0.4).margin(0.0));
    REQUIRE(apply_map(half, 1, {0.0})[0] == Approx(0.5).margin(0.0));
    REQUIRE_THROWS_AS(apply_map(half, 2, {0.0}), IndexOutOfRangeError);

    IfsSystem planar;
    planar.dimension = 2;
    planar.maps = {AffineMap{{1.0, 0.0, 0.0, 1.0}, {1.0, 1.0}, 0.0}};
    planar.field.exprs = {ProbExpr{ProbExpr::Constant{1.0}}};
    planar.base_point = {0.0, 0.0};
    planar.domain_box = Box{{0.0, 0.0}, {2.0, 2.0}};
    finalize(planar);
    Vec image = apply_map(planar, 0, {0.0, 0.0});
    REQUIRE(image[0] == 1.0);
    REQUIRE(image[1] == 1.0);
}

TEST_CASE("apply_map is deterministic bit for bit") {
    IfsSystem tilt = make_tilt();
    Vec a = apply_map(tilt, 0, {0.123456789});
    Vec b = apply_map(tilt, 0, {0.123456789});
    REQUIRE(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);
}

TEST_CASE("cached Lipschitz constant of c*I is |c| under the euclidean metric") {
    for (double c : {0.5, -0.25, 2.0}) {
        IfsSystem s;
        s.dimension = 2;
        s.metric = Metric::euclidean;
        s.maps = {AffineMap{{c, 0.0, 0.0, c}, {0.0, 0.0}, 0.0}};
        s.field.exprs = {ProbExpr{ProbExpr::Constant{1.0}}};
        s.base_point = {0.0, 0.0};
        s.domain_box = Box{{-1.0, -1.0}, {1.0, 1.0}};
        finalize(s);
        REQUIRE(s.maps[0].cached_lipschitz == Approx(std::fabs(c)).margin(1e-12));
    }
}

TEST_CASE("induced operator norms under the three metrics") {
    // rows (1, 2), (3, -1): sup-norm = max row abs sum = 4, manhattan = max col = 4
    std::vector<double> m{1.0, 2.0, 3.0, -1.0};
    REQUIRE(induced_operator_norm(m, 2, Metric::sup) == Approx(4.0));
    REQUIRE(induced_operator_norm(m, 2, Metric::manhattan) == Approx(4.0));
    // spectral norm bounded by the Frobenius norm, above the sup of columns
    double spectral = induced_operator_norm(m, 2, Metric::euclidean);
    REQUIRE(spectral >= 3.0);
    REQUIRE(spectral <= std::sqrt(15.0) + 1e-12);
}

TEST_CASE("validation catches the spec'd structural faults") {
    REQUIRE(validate_system(make_half()).ok());
    REQUIRE(validate_system(make_tilt()).ok());

    SECTION("field does not sum to one in exact mode") {
        IfsSystem bad = make_half();
        bad.field.exprs = {ProbExpr{ProbExpr::Constant{0.6}}, ProbExpr{ProbExpr::Constant{0.6}}};
        finalize(bad);
        ValidationReport rep = validate_system(bad);
        REQUIRE_FALSE(rep.ok());
        bool found = false;
        for (const auto& v : rep.violations) found = found || v.find("sum to 1") != std::string::npos;
        REQUIRE(found);
    }
    SECTION("length mismatch") {
        IfsSystem bad = make_half();
        bad.field.exprs.push_back(ProbExpr{ProbExpr::Constant{0.0}});
        ValidationReport rep = validate_system(bad);
        REQUIRE_FALSE(rep.ok());
        bool found = false;
        for (const auto& v : rep.violations) found = found || v.find("length mismatch") != std::string::npos;
        REQUIRE(found);
    }
    SECTION("base point outside the box") {
        IfsSystem bad = make_half();
        bad.base_point = {2.0};
        REQUIRE_FALSE(validate_system(bad).ok());
    }
    SECTION("mixed softmax field") {
        IfsSystem bad = make_half();
        bad.field.exprs[0] = ProbExpr{ProbExpr::Softmax{{1.0}, 0.0}};
        REQUIRE_FALSE(validate_system(bad).ok());
    }
}

TEST_CASE("softmax fields are joint and strictly positive") {
    IfsSystem s;
    s.dimension = 1;
    s.metric = Metric::euclidean;
    s.maps = {AffineMap{{0.5}, {0.0}, 0.0}, AffineMap{{0.5}, {0.5}, 0.0}};
    s.field.exprs = {ProbExpr{ProbExpr::Softmax{{1.0}, 0.0}}, ProbExpr{ProbExpr::Softmax{{-1.0}, 0.0}}};
    s.base_point = {0.5};
    s.domain_box = Box{{0.0}, {1.0}};
    finalize(s);
    REQUIRE(validate_system(s).ok());
    Vec p = evaluate_probabilities(s, {0.25});
    REQUIRE(p[0] + p[1] == Approx(1.0).margin(1e-15));
    REQUIRE(p[0] == Approx(1.0 / (1.0 + std::exp(-0.5))).margin(1e-12));
    // softmax component Lipschitz bound: max_j |w_i - w_j| / 4 = 0.5
    REQUIRE(s.field.lipschitz_bounds[0] == Approx(0.5).margin(1e-12));
}

TEST_CASE("bundled system files round-trip through the loader") {
    for (const char* name : {"half", "tilt", "half_expanding"}) {
        IfsSystem s = load_system(std::string(IFSLAB_SYSTEMS_DIR) + "/" + name + ".json");
        REQUIRE(s.dimension == 1);
        REQUIRE(validate_system(s).ok());
        nlohmann::json j = system_to_json(s);
        IfsSystem back = system_from_json(j, s.name);
        REQUIRE(back.maps.size() == s.maps.size());
        REQUIRE(back.maps[1].offset == s.maps[1].offset);
        Vec p0 = evaluate_probabilities(s, {0.7});
        Vec p1 = evaluate_probabilities(back, {0.7});
        REQUIRE(p0 == p1);
    }
    // bundled files match the in-code reference systems
    IfsSystem half = load_system(std::string(IFSLAB_SYSTEMS_DIR) + "/half.json");
    IfsSystem ref = make_half();
    REQUIRE(half.maps[0].matrix == ref.maps[0].matrix);
    REQUIRE(half.maps[1].offset == ref.maps[1].offset);
}

TEST_CASE("malformed definitions raise ConfigError") {
    REQUIRE_THROWS_AS(load_system("/nonexistent/path.json"), ConfigError);
    nlohmann::json j = {{"dimension", 1}};
    REQUIRE_THROWS_AS(system_from_json(j), ConfigError);
    nlohmann::json bad_metric = system_to_json(make_half());
    bad_metric["metric"] = "hyperbolic";
    REQUIRE_THROWS_AS(system_from_json(bad_metric), ConfigError);
}
