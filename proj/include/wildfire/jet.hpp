#pragma once

// Second-order forward-mode jet over N tagged input directions. Carries the
// value, the N first derivatives and the N pure second derivatives (no mixed
// terms). Propagation follows the exact Taylor rules, e.g.
//   (f g)'' = f'' g + 2 f' g' + f g''
//   (phi o f)'' = phi''(f) f'^2 + phi'(f) f''

#include <array>
#include <cmath>
#include <cstddef>

namespace wildfire {

template <std::size_t N>
struct Jet2 {
    double v = 0.0;
    std::array<double, N> d{};  ///< first derivatives
    std::array<double, N> dd{}; ///< pure second derivatives

    Jet2() = default;
    Jet2(double value) : v(value) {} // NOLINT(google-explicit-constructor)

    /// The k-th independent variable at `value`.
    static Jet2 variable(double value, std::size_t k)
    {
        Jet2 j(value);
        j.d[k] = 1.0;
        return j;
    }

    Jet2& operator+=(const Jet2& o)
    {
        v += o.v;
        for (std::size_t k = 0; k < N; ++k) {
            d[k] += o.d[k];
            dd[k] += o.dd[k];
        }
        return *this;
    }
    Jet2& operator-=(const Jet2& o)
    {
        v -= o.v;
        for (std::size_t k = 0; k < N; ++k) {
            d[k] -= o.d[k];
            dd[k] -= o.dd[k];
        }
        return *this;
    }
    Jet2& operator*=(double s)
    {
        v *= s;
        for (std::size_t k = 0; k < N; ++k) {
            d[k] *= s;
            dd[k] *= s;
        }
        return *this;
    }
    Jet2& operator*=(const Jet2& o)
    {
        for (std::size_t k = 0; k < N; ++k) {
            dd[k] = dd[k] * o.v + 2.0 * d[k] * o.d[k] + v * o.dd[k];
            d[k] = d[k] * o.v + v * o.d[k];
        }
        v *= o.v;
        return *this;
    }

    friend Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
    friend Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
    friend Jet2 operator*(Jet2 a, const Jet2& b) { return a *= b; }
    friend Jet2 operator*(Jet2 a, double s) { return a *= s; }
    friend Jet2 operator*(double s, Jet2 a) { return a *= s; }
    friend Jet2 operator-(Jet2 a)
    {
        a *= -1.0;
        return a;
    }
};

/// Applies a scalar function given its value and first two derivatives at a.v.
template <std::size_t N>
Jet2<N> chain(const Jet2<N>& a, double f, double df, double d2f)
{
    Jet2<N> r(f);
    for (std::size_t k = 0; k < N; ++k) {
        r.d[k] = df * a.d[k];
        r.dd[k] = d2f * a.d[k] * a.d[k] + df * a.dd[k];
    }
    return r;
}

template <std::size_t N>
Jet2<N> sigmoid(const Jet2<N>& a)
{
    const double s = 1.0 / (1.0 + std::exp(-a.v));
    const double s1 = s * (1.0 - s);
    return chain(a, s, s1, s1 * (1.0 - 2.0 * s));
}

template <std::size_t N>
Jet2<N> exp(const Jet2<N>& a)
{
    const double e = std::exp(a.v);
    return chain(a, e, e, e);
}

template <std::size_t N>
Jet2<N> reciprocal(const Jet2<N>& a)
{
    const double r = 1.0 / a.v;
    return chain(a, r, -r * r, 2.0 * r * r * r);
}

template <std::size_t N>
Jet2<N> operator/(const Jet2<N>& a, const Jet2<N>& b)
{
    return a * reciprocal(b);
}

} // namespace wildfire
