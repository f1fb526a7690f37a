"""Extended-precision Mittag-Leffler reference values.

Independent of the package: the power series at raised working precision
for moderate |z|^(1/alpha), and the real-axis cut integral (plus the pole
contribution) beyond that.  Run as a script to regenerate
``tests/data/ml_reference.json``.
"""

import json
from pathlib import Path

import mpmath as mp

ALPHAS = (0.3, 0.5, 0.9, 1.1, 1.5, 1.9)
Z_GRID = [-50.0 + 55.0 * i / 20 for i in range(21)]
SERIES_LIMIT = 150.0
OUT = Path(__file__).resolve().parent.parent / "data" / "ml_reference.json"


def betas(alpha):
    return (0.5, 1.0, 2.0, alpha)


def series(alpha, beta, z, extra=30):
    # cancellation in the alternating series costs about rho/ln(10) digits
    rho = abs(float(z)) ** (1.0 / alpha)
    with mp.workdps(int(rho / 2.30) + extra):
        a, b, zz = mp.mpf(alpha), mp.mpf(beta), mp.mpf(z)
        tol = mp.mpf(10) ** (-(extra + 5))
        s, k, quiet = mp.mpf(0), 0, 0
        while quiet <= 3:
            term = zz ** k * mp.rgamma(a * k + b)
            s += term
            quiet = quiet + 1 if k > 5 and abs(term) < tol * max(abs(s), tol) else 0
            k += 1
        return +s


def cut_integral(alpha, beta, z, dps=30):
    with mp.workdps(dps):
        a, b, zz = mp.mpf(alpha), mp.mpf(beta), mp.mpf(z)
        if b >= a + 1:
            return (cut_integral(alpha, beta - alpha, z, dps) - mp.rgamma(b - a)) / zz
        x = -zz

        def density(v):
            r = mp.exp(v)
            ra = r ** a
            num = ra * mp.sinpi(b) - x * mp.sinpi(a - b)
            return r * mp.exp(-r) * r ** (a - b) * num / (ra * ra + 2 * x * ra * mp.cospi(a) + x * x)

        pts = [-mp.inf, -20, -5, 0, 2, mp.log(200)]
        peak = mp.log(abs(x)) / a
        if -5 < peak < mp.log(200):
            pts.append(peak)
        val = mp.quad(density, sorted(pts)) / mp.pi
        if zz > 0:
            val += zz ** ((1 - b) / a) * mp.exp(zz ** (1 / a)) / a
        elif a > 1:
            s = x ** (1 / a) * mp.expjpi(1 / a)
            val += 2 / a * mp.re(s ** (1 - b) * mp.exp(s))
        return +val


def reference(alpha, beta, z):
    if z == 0:
        return float(mp.rgamma(beta))
    if z > 0 or abs(z) ** (1.0 / alpha) <= SERIES_LIMIT:
        return float(series(alpha, beta, z))
    return float(cut_integral(alpha, beta, z))


def build():
    rows = []
    for a in ALPHAS:
        for b in betas(a):
            for z in Z_GRID:
                rows.append([a, b, z, reference(a, b, z)])
    return rows


if __name__ == "__main__":
    rows = build()
    OUT.write_text(json.dumps({"columns": ["alpha", "beta", "z", "value"], "rows": rows}, indent=0) + "\n")
    print(f"{len(rows)} values written to {OUT}")
