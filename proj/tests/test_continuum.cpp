#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "transnn/continuum.hpp"
#include "transnn/continuum_io.hpp"

using namespace transnn;

namespace {

ContinuousRates random_rates(std::mt19937_64& rng, std::size_t n, double hi = 1.0) {
    ContinuousRates r;
    r.c = Matrix(n, n);
    for (double& v : r.c.data()) v = fixtures::uniform(rng, 0.0, hi);
    return r;
}

Matrix symmetric_adjacency(std::mt19937_64& rng, std::size_t n) {
    return fixtures::random_symmetric_graph(rng, n, 0.5);
}

// two identical nodes with identical starts reduce to the logistic equation
// p' = (beta - gamma) p - beta p^2
double logistic(double beta, double gamma, double p0, double t) {
    const double r = beta - gamma;
    const double k = r / beta;
    return k / (1.0 + (k / p0 - 1.0) * std::exp(-r * t));
}

double integrate_logistic_error(double dt) {
    ContinuousRates r;
    r.c = Matrix{{0.5, 2.0}, {2.0, 0.5}};
    const Matrix adj = complete_adjacency(2);
    const auto ts = integrate([&](std::span<const double> p) { return sis_rhs_single(r, adj, p); },
                              ProbabilityState({0.1, 0.1}), 4.0, dt);
    double worst = 0.0;
    for (std::size_t k = 0; k < ts.t.size(); ++k)
        worst = std::max(worst, std::abs(ts.p[k][0] - logistic(2.0, 0.5, 0.1, ts.t[k])));
    return worst;
}

}  // namespace

TEST(Field, HandExamples) {
    std::mt19937_64 rng(1);
    const auto r = random_rates(rng, 4);
    const Matrix adj = complete_adjacency(4);
    EXPECT_EQ(sis_rhs_single(r, adj, Vector(4, 0.0)), Vector(4, 0.0));

    ContinuousRates heal;
    heal.c = Matrix{{0.5}};
    EXPECT_DOUBLE_EQ(sis_rhs_single(heal, Matrix(1, 1), Vector{1.0})[0], -0.5);

    ContinuousRates si;
    si.c = Matrix{{0.0, 1.0}, {1.0, 0.0}};
    const Vector dp = sis_rhs_single(si, complete_adjacency(2), Vector{0.0, 1.0});
    EXPECT_DOUBLE_EQ(dp[0], 1.0);
    EXPECT_DOUBLE_EQ(dp[1], 0.0);
}

TEST(Field, MultiWithUnitKappaIsSingleOnCompleteGraph) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + trial % 8;
        auto single = random_rates(rng, n, 3.0);
        auto multi = single;
        multi.kappa = Matrix(n, n, 1.0);
        Vector p(n);
        for (double& v : p) v = fixtures::uniform(rng);
        const Vector a = sis_rhs_single(single, complete_adjacency(n), p);
        const Vector b = sis_rhs_multi(multi, p);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
    }
}

TEST(Integrate, PureHealingClosedForm) {
    ContinuousRates r;
    r.c = Matrix{{1.0}};
    const auto ts = integrate([&](std::span<const double> p) { return sis_rhs_single(r, Matrix(1, 1), p); },
                              ProbabilityState({0.8}), 1.0, 0.01);
    EXPECT_DOUBLE_EQ(ts.t.back(), 1.0);
    EXPECT_NEAR(ts.p.back()[0], 0.8 * std::exp(-1.0), 1e-8);
    EXPECT_TRUE(ts.clamps.empty());
}

TEST(Integrate, LastStepLandsOnEndTime) {
    ContinuousRates r;
    r.c = Matrix{{1.0}};
    const auto ts = integrate([&](std::span<const double> p) { return sis_rhs_single(r, Matrix(1, 1), p); },
                              ProbabilityState({0.8}), 1.05, 0.1);
    EXPECT_EQ(ts.t.size(), 12u);
    EXPECT_DOUBLE_EQ(ts.t.back(), 1.05);
    EXPECT_NEAR(ts.p.back()[0], 0.8 * std::exp(-1.05), 1e-6);
}

TEST(Integrate, FourthOrderConvergence) {
    const double e1 = integrate_logistic_error(0.1);
    const double e2 = integrate_logistic_error(0.05);
    EXPECT_GT(e1 / e2, 12.0);
    EXPECT_LT(e1 / e2, 20.0);
}

TEST(Integrate, ClampsAreLoggedAndBounded) {
    ContinuousRates r;
    r.c = Matrix{{50.0}};
    const auto ts = integrate([&](std::span<const double> p) { return sis_rhs_single(r, Matrix(1, 1), p); },
                              ProbabilityState({1.0}), 1.0, 0.2);
    ASSERT_FALSE(ts.clamps.empty());
    EXPECT_GT(ts.max_clamp(), 0.0);
    for (const auto& p : ts.p) EXPECT_TRUE(p[0] >= 0.0 && p[0] <= 1.0);

    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto rates = random_rates(rng, 6, 2.0);
        const Matrix adj = symmetric_adjacency(rng, 6);
        const auto series = integrate([&](std::span<const double> p) { return sis_rhs_single(rates, adj, p); },
                                      fixtures::random_state(rng, 6), 5.0, 0.01);
        EXPECT_LT(series.max_clamp(), 1e-9);
    }
}

TEST(Integrate, RejectsBadArguments) {
    const VectorField zero = [](std::span<const double> p) { return Vector(p.size(), 0.0); };
    EXPECT_THROW(integrate(zero, ProbabilityState({0.5}), 1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(integrate(zero, ProbabilityState({0.5}), -1.0, 0.1), std::invalid_argument);
    const VectorField nan = [](std::span<const double> p) { return Vector(p.size(), std::nan("")); };
    EXPECT_THROW(integrate(nan, ProbabilityState({0.5}), 1.0, 0.1), NumericalError);
}

TEST(Linearization, SignPredictsDecay) {
    std::mt19937_64 rng(50);
    int stable = 0, unstable = 0;
    for (int trial = 0; trial < 50; ++trial) {
        auto rates = random_rates(rng, 5);
        for (std::size_t i = 0; i < 5; ++i) rates.c(i, i) = fixtures::uniform(rng, 0.2, 2.5);
        const Matrix adj = symmetric_adjacency(rng, 5);
        const double lambda = max_real_eigenvalue(sis_linearization(rates, adj));
        if (std::abs(lambda) < 0.05) continue;
        const auto ts = integrate([&](std::span<const double> p) { return sis_rhs_single(rates, adj, p); },
                                  ProbabilityState(Vector(5, 0.01)), 200.0, 0.05);
        double tail = 0.0;
        for (double v : ts.p.back()) tail = std::max(tail, v);
        if (lambda < 0) {
            ++stable;
            EXPECT_LT(tail, 1e-4) << trial;
        } else {
            ++unstable;
            EXPECT_GT(tail, 1e-3) << trial;
        }
    }
    EXPECT_GT(stable, 5);
    EXPECT_GT(unstable, 5);
}

TEST(Consistency, SingleParticleFirstOrder) {
    const RateSystem sys = load_rates(TRANSNN_DATA_DIR "/rates_single.json");
    const ProbabilityState p0({0.3, 0.1, 0.6});
    const auto table = discretization_consistency(sys.rates, sys.adjacency, p0, {0.1, 0.05, 0.025, 0.0125});
    ASSERT_EQ(table.size(), 4u);
    EXPECT_TRUE(std::isnan(table[0].order_estimate));
    for (std::size_t k = 1; k < table.size(); ++k) {
        EXPECT_LT(table[k].sup_error, table[k - 1].sup_error);
        EXPECT_GT(table[k].order_estimate, 0.8);
        EXPECT_LT(table[k].order_estimate, 1.2);
    }
}

TEST(Consistency, LinearSelfLinkWithinFactorTwo) {
    const RateSystem sys = load_rates(TRANSNN_DATA_DIR "/rates_single.json");
    const ProbabilityState p0({0.3, 0.1, 0.6});
    const std::vector<double> deltas{0.1, 0.05, 0.025};
    const auto ex = discretization_consistency(sys.rates, sys.adjacency, p0, deltas);
    ConsistencyOptions opt;
    opt.self = SelfTransmission::Linear;
    const auto lin = discretization_consistency(sys.rates, sys.adjacency, p0, deltas, opt);
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        const double ratio = ex[k].sup_error / lin[k].sup_error;
        EXPECT_GT(ratio, 0.5);
        EXPECT_LT(ratio, 2.0);
    }
}

TEST(Consistency, RandomSingleParticleSystems) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const auto rates = random_rates(rng, 4);
        const Matrix adj = symmetric_adjacency(rng, 4);
        const auto table = discretization_consistency(rates, adj, fixtures::random_state(rng, 4),
                                                      {0.08, 0.04, 0.02});
        for (std::size_t k = 1; k < table.size(); ++k) {
            if (table[k].sup_error < 1e-12) continue;
            EXPECT_GT(table[k].order_estimate, 0.8) << trial;
            EXPECT_LT(table[k].order_estimate, 1.2) << trial;
        }
    }
}

TEST(Consistency, MultiParticleErrorShrinksForEveryEpsilon) {
    RateSystem sys = load_rates(TRANSNN_DATA_DIR "/rates_multi.json");
    const ProbabilityState p0({0.4, 0.2});
    for (double eps : {0.25, 0.5, 0.75}) {
        sys.rates.epsilon = eps;
        const auto table = discretization_consistency(sys.rates, sys.adjacency, p0, {0.04, 0.01, 0.0025, 0.000625});
        for (std::size_t k = 1; k < table.size(); ++k) EXPECT_LT(table[k].sup_error, table[k - 1].sup_error) << eps;
        EXPECT_LT(table.back().sup_error, 0.05) << eps;
    }
}

TEST(Consistency, ZeroRatesGiveZeroError) {
    const RateSystem sys = load_rates(TRANSNN_DATA_DIR "/rates_zero.json");
    const std::size_t n = sys.rates.size();
    const auto table = discretization_consistency(sys.rates, sys.adjacency, ProbabilityState(Vector(n, 0.4)),
                                                  {0.1, 0.05});
    for (const auto& row : table) EXPECT_EQ(row.sup_error, 0.0);
    std::ostringstream out;
    write_consistency_csv(out, table);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "delta,sup_error,order_estimate");
    EXPECT_NE(out.str().find(",nan\n"), std::string::npos);
}

TEST(Consistency, OversizedDeltaIsRejected) {
    ContinuousRates r;
    r.c = Matrix{{4.0, 0.5}, {0.5, 1.0}};
    ConsistencyOptions opt;
    opt.self = SelfTransmission::Linear;
    try {
        discretization_consistency(r, complete_adjacency(2), ProbabilityState({0.5, 0.5}), {0.5, 0.1}, opt);
        FAIL() << "expected DeltaTooLarge";
    } catch (const DeltaTooLarge& e) {
        EXPECT_EQ(e.delta(), 0.5);
        EXPECT_NE(e.entry().find("c[0][0]"), std::string::npos);
    }
    EXPECT_THROW(discretization_consistency(r, complete_adjacency(2), ProbabilityState({0.5, 0.5}), {3.0}),
                 DeltaTooLarge);
    EXPECT_THROW(discretization_consistency(r, complete_adjacency(2), ProbabilityState({0.5, 0.5}), {0.1, 0.2}),
                 std::invalid_argument);
}

TEST(RatesIO, RoundTripAndValidation) {
    const RateSystem a = load_rates(TRANSNN_DATA_DIR "/rates_multi.json");
    const RateSystem b = rates_from_json(rates_to_json(a));
    EXPECT_EQ(b.rates.c, a.rates.c);
    EXPECT_EQ(b.rates.kappa, a.rates.kappa);
    EXPECT_EQ(b.rates.epsilon, a.rates.epsilon);

    auto field = [](const char* text) -> std::string {
        try {
            rates_from_json(nlohmann::json::parse(text));
        } catch (const ValidationError& e) {
            return e.field();
        }
        return "<no error>";
    };
    EXPECT_EQ(field(R"({"n":2,"c":[[1,-1],[0,1]]})"), "c[0][1]");
    EXPECT_EQ(field(R"({"n":1,"model":"multi","c":[[1]]})"), "kappa");
    EXPECT_EQ(field(R"({"n":1,"model":"multi","c":[[1]],"kappa":[[1]],"epsilon":2})"), "epsilon");
    EXPECT_EQ(field(R"({"n":2,"c":[[1,1],[1,1]],"adjacency":[[0,2],[1,0]]})"), "adjacency[0][1]");
}
