#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "sfv/csv.hpp"
#include "sfv/design.hpp"
#include "sfv/error.hpp"
#include "test_support.hpp"

using namespace sfv;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
    auto dir = std::filesystem::temp_directory_path() / "sfv_design_tests";
    std::filesystem::create_directories(dir);
    auto path = dir / name;
    std::ofstream(path) << contents;
    return path;
}

DesignSpec gaussian(int n, int p) {
    DesignSpec d;
    d.n = n;
    d.p = p;
    return d;
}

SignalSpec one_block(int p, int k, double m, double sigma) {
    SignalSpec s;
    s.p = p;
    if (k > 0) s.blocks.push_back({k, m});
    s.noise_sigma = sigma;
    return s;
}

} // namespace

TEST_CASE("fig1 recipe: dimensions, support and coefficients") {
    const int n = 2000, p = 1800, k = 50;
    const double m = 100.0 * std::sqrt(2.0 * std::log(1800.0));
    CHECK(m == doctest::Approx(387.2).epsilon(1e-3));
    DesignSpec d = gaussian(n, p);
    d.scale = 1.0 / 2000;
    const Dataset data = generate_dataset(d, one_block(p, k, m, 1.0), 11);
    REQUIRE(data.X.rows() == n);
    REQUIRE(data.X.cols() == p);
    REQUIRE(data.support.size() == static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) CHECK(data.support[static_cast<std::size_t>(j)] == j);
    CHECK(data.beta.head(k).isConstant(m));
    CHECK(data.beta.tail(p - k).isZero(0.0));
    // entries ~ N(0, 1/n): sample variance close to 1/n
    const double var = data.X.squaredNorm() / (static_cast<double>(n) * p);
    CHECK(var * n == doctest::Approx(1.0).epsilon(0.01));
    // noise ~ N(0, 1)
    const Eigen::VectorXd z = data.y - data.X * data.beta;
    CHECK(z.squaredNorm() / n == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("no signal and no noise gives a zero response") {
    const Dataset data = generate_dataset(gaussian(20, 10), one_block(10, 0, 0.0, 0.0), 3);
    CHECK(data.y.isZero(0.0));
    CHECK(data.support.empty());
}

TEST_CASE("generation is a pure function of (design, signal, seed)") {
    DesignSpec d = gaussian(40, 30);
    SignalSpec s = one_block(30, 5, 3.0, 1.0);
    s.shuffle_support = true;
    const Dataset a = generate_dataset(d, s, 99);
    const Dataset b = generate_dataset(d, s, 99);
    CHECK(a.X == b.X);
    CHECK(a.y == b.y);
    CHECK(a.beta == b.beta);
    CHECK(a.support == b.support);
    const Dataset c = generate_dataset(d, s, 100);
    CHECK(a.X != c.X);
}

TEST_CASE("support equals the nonzero coefficient set, including shuffled placement") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        SignalSpec s;
        s.p = 40;
        s.blocks = {{5, 2.0}, {3, -1.5}};
        s.shuffle_support = seed % 2 == 0;
        const Dataset data = generate_dataset(gaussian(10, 40), s, seed);
        std::vector<int> expected;
        for (int j = 0; j < 40; ++j)
            if (data.beta[j] != 0.0) expected.push_back(j);
        CHECK(data.support == expected);
        CHECK(data.support.size() == 8u);
        CHECK((data.beta.array() == 2.0).count() == 5);
        CHECK((data.beta.array() == -1.5).count() == 3);
    }
}

TEST_CASE("Bernoulli entries are +-sqrt(scale) with balanced signs") {
    DesignSpec d = gaussian(800, 60);
    d.family = DesignFamily::BernoulliRademacher;
    d.scale = 1.0 / 500;
    const Dataset data = generate_dataset(d, one_block(60, 0, 0.0, 0.0), 5);
    const double a = std::sqrt(1.0 / 500);
    CHECK((data.X.array().abs() == a).all());
    const double positive = static_cast<double>((data.X.array() > 0).count()) / data.X.size();
    CHECK(positive == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("equicorrelation with rho = 0 matches the iid Gram matrix in expectation") {
    const int n = 50, p = 20, seeds = 200;
    DesignSpec iid = gaussian(n, p);
    DesignSpec equi = iid;
    equi.family = DesignFamily::GaussianCorrelated;
    equi.correlation = EquiCorrelation{0.0};
    Eigen::MatrixXd g_iid = Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd g_equi = Eigen::MatrixXd::Zero(p, p);
    for (int s = 0; s < seeds; ++s) {
        const auto a = generate_dataset(iid, one_block(p, 0, 0, 0), static_cast<std::uint64_t>(s));
        const auto b = generate_dataset(equi, one_block(p, 0, 0, 0), static_cast<std::uint64_t>(s + 10000));
        g_iid += a.X.transpose() * a.X;
        g_equi += b.X.transpose() * b.X;
    }
    g_iid /= seeds;
    g_equi /= seeds;
    CHECK((g_iid - g_equi).cwiseAbs().maxCoeff() <= 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("correlated designs reproduce their covariance") {
    const int n = 400, p = 6, seeds = 100;
    DesignSpec d = gaussian(n, p);
    d.family = DesignFamily::GaussianCorrelated;
    d.correlation = DecayingCorrelation{0.6};
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
    for (int s = 0; s < seeds; ++s) {
        const auto data = generate_dataset(d, one_block(p, 0, 0, 0), static_cast<std::uint64_t>(s));
        cov += data.X.transpose() * data.X;
    }
    cov /= seeds; // E[X^T X] = n Sigma = correlation matrix
    CHECK(cov(0, 1) == doctest::Approx(0.6).epsilon(0.05));
    CHECK(cov(0, 2) == doctest::Approx(0.36).epsilon(0.08));
    CHECK(cov(3, 3) == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("column norms concentrate at one for N(0, 1/n) entries") {
    const int n = 500, p = 50, seeds = 500;
    const double band = 4.0 / std::sqrt(static_cast<double>(n));
    int inside = 0;
    for (int s = 0; s < seeds; ++s) {
        const auto data = generate_dataset(gaussian(n, p), one_block(p, 0, 0, 0), static_cast<std::uint64_t>(s));
        const double mean_sq = data.X.colwise().squaredNorm().mean();
        if (std::abs(mean_sq - 1.0) <= band) ++inside;
    }
    CHECK(inside >= 0.99 * seeds);
}

TEST_CASE("invalid specifications are rejected") {
    CHECK_THROWS_AS(generate_dataset(gaussian(10, 5), one_block(6, 1, 1.0, 0.0), 1), InvalidArgument);
    DesignSpec d = gaussian(10, 5);
    d.family = DesignFamily::GaussianCorrelated;
    CHECK_THROWS_AS(d.validate(), InvalidArgument);
    d.correlation = EquiCorrelation{1.0};
    CHECK_THROWS_AS(d.validate(), InvalidArgument);
    d.correlation = DecayingCorrelation{-1.0};
    CHECK_THROWS_AS(d.validate(), InvalidArgument);
    DesignSpec iid = gaussian(10, 5);
    iid.correlation = EquiCorrelation{0.2};
    CHECK_THROWS_AS(iid.validate(), InvalidArgument);
    CHECK_THROWS_AS(generate_dataset(gaussian(10, 5), one_block(5, 6, 1.0, 0.0), 1), InvalidArgument);
    CHECK_THROWS_AS(generate_dataset(gaussian(0, 5), one_block(5, 1, 1.0, 0.0), 1), InvalidArgument);
}

TEST_CASE("Cholesky reports the failing leading minor") {
    Eigen::MatrixXd sigma(3, 3);
    sigma << 1, 0.5, 1, 0.5, 1, 0.5, 1, 0.5, 1; // rows 0 and 2 coincide
    try {
        cholesky_lower(sigma);
        FAIL("expected a failure");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("leading minor 3") != std::string::npos);
    }
    Eigen::MatrixXd good = Eigen::MatrixXd::Identity(4, 4) * 0.5;
    good(0, 1) = good(1, 0) = 0.1;
    const Eigen::MatrixXd L = cholesky_lower(good);
    CHECK((L * L.transpose() - good).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("standardize_columns") {
    SUBCASE("two-point symmetric column") {
        Eigen::MatrixXd X(2, 1);
        X << 1, -1;
        const Eigen::MatrixXd S = standardize_columns(X);
        CHECK(S(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
        CHECK(S(1, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
    }
    SUBCASE("random matrix: mean zero and unit norm by recomputation") {
        const Eigen::MatrixXd X = testing::random_matrix(30, 5, 42, 3.0).array() + 2.0;
        const Eigen::MatrixXd S = standardize_columns(X);
        for (int j = 0; j < 5; ++j) {
            double sum = 0.0, sq = 0.0;
            for (int i = 0; i < 30; ++i) {
                sum += S(i, j);
                sq += S(i, j) * S(i, j);
            }
            CHECK(std::abs(sum / 30) < 1e-12);
            CHECK(std::abs(std::sqrt(sq) - 1.0) < 1e-12);
        }
    }
    SUBCASE("idempotent") {
        const Eigen::MatrixXd S = standardize_columns(testing::random_matrix(25, 7, 3));
        CHECK((standardize_columns(S) - S).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("constant column is reported by index") {
        Eigen::MatrixXd X = testing::random_matrix(6, 3, 1);
        X.col(1).setConstant(4.0);
        try {
            standardize_columns(X);
            FAIL("expected a failure");
        } catch (const InvalidArgument& e) {
            CHECK(std::string(e.what()).find("column 1") != std::string::npos);
        }
    }
}

TEST_CASE("load_design_csv") {
    Eigen::MatrixXd expected(3, 2);
    expected << 1, 2, 3, 4, 5, 6;
    CHECK(load_design_csv(temp_file("plain.csv", "1,2\n3,4\n5,6"), false) == expected);
    CHECK(load_design_csv(temp_file("header.csv", "a,b\n1,2\n3,4\n5,6\n"), false) == expected);
    CHECK(load_design_csv(temp_file("crlf.csv", "a,b\r\n1,2\r\n3,4\r\n5,6\r\n"), false) == expected);

    const Eigen::MatrixXd std_loaded = load_design_csv(temp_file("std.csv", "1,2\n3,4\n5,7\n"), true);
    CHECK(std::abs(std_loaded.col(1).norm() - 1.0) < 1e-12);

    auto error_text = [](const std::filesystem::path& path) {
        try {
            load_design_csv(path, false);
        } catch (const ParseError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(error_text(temp_file("ragged.csv", "1,2\n3\n")).find("line 2") != std::string::npos);
    const auto bad = error_text(temp_file("bad.csv", "1,2\n3,x\n"));
    CHECK(bad.find("line 2") != std::string::npos);
    CHECK(bad.find("column 2") != std::string::npos);
    CHECK(error_text(temp_file("empty.csv", "")).find("no numeric rows") != std::string::npos);
    CHECK_THROWS_AS(load_design_csv("/nonexistent/sfv.csv", false), Error);
}

TEST_CASE("CSV writer round-trips every value bit-exactly") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Eigen::MatrixXd X = testing::random_matrix(9, 4, seed, std::pow(10.0, static_cast<double>(seed % 7) - 3));
        X(0, 0) = 1.0 / 3.0;
        X(1, 1) = -0.0;
        X(2, 2) = 1e-300;
        X(3, 3) = 123456789.123456789;
        const auto path = temp_file("roundtrip.csv", "");
        csv::write_matrix(path, X);
        const Eigen::MatrixXd back = load_design_csv(path, false);
        REQUIRE(back.rows() == X.rows());
        for (Eigen::Index i = 0; i < X.size(); ++i) CHECK(back.data()[i] == X.data()[i]);
    }
}
