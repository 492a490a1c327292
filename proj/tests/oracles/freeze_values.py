"""Arbitrary-precision oracle for the frozen constants used by the unit tests.

Run with `python3 tests/oracles/freeze_values.py`; the printed values are
copied verbatim into the C++ tests.
"""
from mpmath import mp, mpf, exp, expm1, power

mp.dps = 40


def gamma(k, h):
    k = mpf(k)
    return (abs(k + 1) ** (2 * h) - 2 * abs(k) ** (2 * h) + abs(k - 1) ** (2 * h)) / 2


H = mpf("0.7")
print("fgn gamma(1, 0.7)      =", gamma(1, H))
print("fgn gamma(20, 0.7)     =", gamma(20, H))
print("fgn asym(20, 0.7)      =", H * (2 * H - 1) * mpf(20) ** (2 * H - 2))
print("fgn gamma(40, 0.7)     =", gamma(40, H))
print("fgn asym(40, 0.7)      =", H * (2 * H - 1) * mpf(40) ** (2 * H - 2))
print("var Z_0.5 (A=t^2)      =", mpf("0.25") ** (2 * H))
print("E sum dZ^2 n=1024      =", mpf(1024) * (mpf(1) / 1024) ** (2 * H))
print("stein-stein sigma_1    =", mpf("0.2") + mpf("0.2") * exp(-1))
print("exp(0.05)              =", exp(mpf("0.05")))
print("100 exp(0.3)           =", 100 * exp(mpf("0.3")))

# Three-point self-financing fixture: times {0, .5, 1}, Z {0, .1, -.05},
# sigma = 0.2, nu = 0.1, r = 0.05, y0 = 100, c = 1.  Left-point integral.
nu, r, y0, c, s = mpf("0.1"), mpf("0.05"), mpf(100), mpf(1), mpf("0.2")
t = [mpf(0), mpf("0.5"), mpf(1)]
z = [mpf(0), mpf("0.1"), mpf("-0.05")]
I = [mpf(0)]
for i in range(2):
    I.append(I[-1] + s * (z[i + 1] - z[i]))
X = [exp(r * ti) for ti in t]
Y = [y0 * exp(nu * ti + Ii) for ti, Ii in zip(t, I)]


def hold(ti, yi):
    d = exp(-r * ti) * yi
    return c / y0 * (y0 ** 2 - d ** 2), 2 * c / y0 * (d - y0)


P = []
for ti, yi in zip(t, Y):
    th0, th1 = hold(ti, yi)
    P.append(th0 * exp(r * ti) + th1 * yi)
for i in range(2):
    th0, th1 = hold(t[i], Y[i])
    res = (P[i + 1] - P[i]) - (th0 * (X[i + 1] - X[i]) + th1 * (Y[i + 1] - Y[i]))
    print(f"3pt sf residual[{i}]     =", res)
for i in range(3):
    x = (nu - r) * t[i] + I[i]
    print(f"3pt closed P[{i}]        =", c * y0 * exp(r * t[i]) * expm1(x) ** 2)
