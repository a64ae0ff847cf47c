"""Reference values for the reservoir coefficients.

The frequency integral of each kernel is done analytically,
    int_0^inf w^p e^{-w} e^{iwu} dw = Gamma(p+1) (1 - iu)^{-(p+1)},
and the remaining time integral by mpmath quadrature at 40 digits. Values are
for alpha = 1 and theta = 1; they scale as alpha^2 and (high T) theta.

Writes crates/core/tests/data/coeff_oracle.csv.
"""
import csv
import os

from mpmath import mp, mpf, quad, gamma, sin, cos, j as I

mp.dps = 40

FAMILIES = {"ohmic": mpf(1), "subohmic": mpf(1) / 2, "superohmic": mpf(3)}
XS = ["0.1", "0.3", "1", "10"]
TAUS = ["0.05", "0.5", "1", "2.5", "5", "20", "40"]


def value(p, which, temp, x, tau):
    w0 = 1 / mpf(x)
    if which in ("gamma", "rren"):
        k = lambda u: (gamma(p + 1) * (1 - I * u) ** (-(p + 1))).imag
    elif temp == "high":
        k = lambda u: 2 * (gamma(p) * (1 - I * u) ** (-p)).real
    else:
        k = lambda u: (gamma(p + 1) * (1 - I * u) ** (-(p + 1))).real
    trig = cos if which in ("delta", "rren") else sin
    f = lambda u: k(u) * trig(w0 * u)
    n = max(4, int(tau * w0 / 2) + 4)
    pts = [tau * i / n for i in range(n + 1)]
    return quad(f, pts)


def main():
    out = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "tests", "data", "coeff_oracle.csv")
    rows = []
    for fam, p in FAMILIES.items():
        for temp in ("high", "zero"):
            for which in ("delta", "pi", "gamma", "rren"):
                if which in ("gamma", "rren") and temp == "high":
                    continue
                for x in XS:
                    for tau in TAUS:
                        v = value(p, which, temp, mpf(x), mpf(tau))
                        rows.append([fam, temp, which, x, tau, mp.nstr(v, 25)])
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["family", "temp", "which", "x", "tau", "value"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
