#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <set>

#include "leakdet/rng.hpp"

using leakdet::rng::Stream;

TEST_CASE("streams are pure functions of (master, phase, trial, lane)") {
    Stream a(42, 7, 1001, 0);
    Stream b(42, 7, 1001, 0);
    for (int i = 0; i < 50; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("distinct coordinates give distinct streams") {
    std::set<std::uint64_t> first;
    first.insert(Stream(42, 7, 0, 0).next());
    first.insert(Stream(42, 7, 0, 1).next());
    first.insert(Stream(42, 7, 0, 2).next());
    first.insert(Stream(42, 7, 1, 0).next());
    first.insert(Stream(42, 8, 0, 0).next());
    first.insert(Stream(43, 7, 0, 0).next());
    CHECK(first.size() == 6);
}

TEST_CASE("uniform lies in (0, 1]") {
    Stream s(1, 2, 3);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    CHECK(lo > 0.0);
    CHECK(hi <= 1.0);
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("normal moments") {
    Stream s(2024, 1, 0);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = s.normal();
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(double(n)));
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("complex normal is circular with unit total variance") {
    Stream s(9, 9, 9);
    const int n = 200000;
    double power = 0.0;
    std::complex<double> pseudo{0.0, 0.0};
    for (int i = 0; i < n; ++i) {
        const std::complex<double> z = s.normal_complex();
        power += std::norm(z);
        pseudo += z * z;  // E[z^2] should vanish
    }
    CHECK(power / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::abs(pseudo) / n < 5.0 / std::sqrt(double(n)));
}

TEST_CASE("phase tags separate labels") {
    constexpr auto a = leakdet::rng::phase_tag("sweep:h0");
    constexpr auto b = leakdet::rng::phase_tag("sweep:h1");
    static_assert(a != b);
    CHECK(a != b);
}
