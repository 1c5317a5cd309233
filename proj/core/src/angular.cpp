#include "nanofiber/angular.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace nanofiber {
namespace {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

// Factorials of half-integer sums are always integer-argument here; work in
// doubled units (tj = 2j) so every index below is an exact int.
int doubled(double j, const char* what) {
    const double tj = 2.0 * j;
    const double r = std::round(tj);
    if (std::abs(tj - r) > 1e-9) {
        throw std::invalid_argument(std::string(what) +
                                    " must be integer or half-integer");
    }
    return static_cast<int>(r);
}

const BigInt& factorial(int n) {
    static std::vector<BigInt> table = [] {
        std::vector<BigInt> t(161);
        t[0] = 1;
        for (int i = 1; i < 161; ++i) t[i] = t[i - 1] * i;
        return t;
    }();
    return table.at(static_cast<std::size_t>(n));
}

bool triangle_ok(int ta, int tb, int tc) {
    return tc <= ta + tb && tc >= std::abs(ta - tb) && (ta + tb + tc) % 2 == 0;
}

// Delta(abc)^2 as an exact rational (doubled arguments).
BigRat triangle_sq(int ta, int tb, int tc) {
    return BigRat(factorial((ta + tb - tc) / 2) * factorial((ta - tb + tc) / 2) *
                      factorial((-ta + tb + tc) / 2),
                  factorial((ta + tb + tc) / 2 + 1));
}

double signed_sqrt(const BigRat& sum, const BigRat& radicand) {
    // value = sum * sqrt(radicand); compute sign(sum) * sqrt(sum^2 radicand)
    // so the double conversion happens once, at ~1 ulp.
    const BigRat m2 = sum * sum * radicand;
    const double v = std::sqrt(m2.convert_to<double>());
    return sum < 0 ? -v : v;
}

}  // namespace

double clebsch_gordan(double j1d, double m1d, double j2d, double m2d,
                      double Jd, double Md) {
    const int tj1 = doubled(j1d, "j1"), tm1 = doubled(m1d, "m1");
    const int tj2 = doubled(j2d, "j2"), tm2 = doubled(m2d, "m2");
    const int tJ = doubled(Jd, "J"), tM = doubled(Md, "M");
    if ((tj1 + tm1) % 2 || (tj2 + tm2) % 2 || (tJ + tM) % 2) return 0.0;
    if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tM) > tJ)
        return 0.0;
    if (tM != tm1 + tm2) return 0.0;
    if (!triangle_ok(tj1, tj2, tJ)) return 0.0;

    // Racah sum; k in doubled units is even, loop in plain ints.
    const int kmin = std::max({0, (tj2 - tJ - tm1) / 2, (tj1 - tJ + tm2) / 2});
    const int kmax = std::min({(tj1 + tj2 - tJ) / 2, (tj1 - tm1) / 2,
                               (tj2 + tm2) / 2});
    if (kmin > kmax) return 0.0;

    BigRat sum = 0;
    for (int k = kmin; k <= kmax; ++k) {
        BigInt den = factorial(k) * factorial((tj1 + tj2 - tJ) / 2 - k) *
                     factorial((tj1 - tm1) / 2 - k) *
                     factorial((tj2 + tm2) / 2 - k) *
                     factorial((tJ - tj2 + tm1) / 2 + k) *
                     factorial((tJ - tj1 - tm2) / 2 + k);
        BigRat term(1, den);
        if (k % 2) term = -term;
        sum += term;
    }
    BigRat radicand = triangle_sq(tj1, tj2, tJ) * (tJ + 1);
    radicand *= BigRat(factorial((tj1 + tm1) / 2) * factorial((tj1 - tm1) / 2) *
                       factorial((tj2 + tm2) / 2) * factorial((tj2 - tm2) / 2) *
                       factorial((tJ + tM) / 2) * factorial((tJ - tM) / 2));
    return signed_sqrt(sum, radicand);
}

double wigner_6j(double j1d, double j2d, double j3d, double j4d, double j5d,
                 double j6d) {
    const int t1 = doubled(j1d, "j1"), t2 = doubled(j2d, "j2");
    const int t3 = doubled(j3d, "j3"), t4 = doubled(j4d, "j4");
    const int t5 = doubled(j5d, "j5"), t6 = doubled(j6d, "j6");
    if (!triangle_ok(t1, t2, t3) || !triangle_ok(t1, t5, t6) ||
        !triangle_ok(t4, t2, t6) || !triangle_ok(t4, t5, t3))
        return 0.0;

    const int a1 = (t1 + t2 + t3) / 2, a2 = (t1 + t5 + t6) / 2;
    const int a3 = (t4 + t2 + t6) / 2, a4 = (t4 + t5 + t3) / 2;
    const int b1 = (t1 + t2 + t4 + t5) / 2, b2 = (t2 + t3 + t5 + t6) / 2;
    const int b3 = (t3 + t1 + t6 + t4) / 2;

    BigRat sum = 0;
    for (int t = std::max({a1, a2, a3, a4}); t <= std::min({b1, b2, b3}); ++t) {
        BigInt den = factorial(t - a1) * factorial(t - a2) * factorial(t - a3) *
                     factorial(t - a4) * factorial(b1 - t) * factorial(b2 - t) *
                     factorial(b3 - t);
        BigRat term(factorial(t + 1), den);
        if (t % 2) term = -term;
        sum += term;
    }
    const BigRat radicand = triangle_sq(t1, t2, t3) * triangle_sq(t1, t5, t6) *
                            triangle_sq(t4, t2, t6) * triangle_sq(t4, t5, t3);
    return signed_sqrt(sum, radicand);
}

}  // namespace nanofiber
