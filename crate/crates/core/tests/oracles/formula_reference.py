"""High-precision reference values for the bound formulas.

Writes ../data/formula_reference.tsv: formula id, comma-separated inputs,
expected value. Inputs are parsed to binary64 first so both sides evaluate
at the same point.
"""

from pathlib import Path

from mpmath import mp, mpf, exp, log, inf

mp.dps = 50


def dual(p):
    return mpf(1) if p == inf else p / (p - 1)


def thm31_pi(k_p, k, p):
    ps = dual(p)
    return k_p * (ps + k**ps)


def thm31_lsi(k_ls, k, p):
    ps = dual(p)
    return 3 * k_ls * (ps + k**ps) * (1 + ps * log(k))


def cor41(R, t):
    return 6 * (4 * R**2 + t) * exp(4 * R**2 / t)


def rem3_large_t(R, t):
    assert t >= 4 * R**2
    return t + 130 * R**2


def rem3_lower(R, t):
    return R**2 / 4 * exp(R**2 / (8 * t))


def thm42_pi(sigma2, c_sg, t):
    return t * (t / (t - sigma2) + c_sg ** (sigma2 / (t - sigma2)))


def thm42_lsi(sigma2, c_sg, t):
    brace = t / (t - sigma2) + c_sg ** (sigma2 / (t - sigma2))
    return 3 * t * brace * (1 + sigma2 / (t - sigma2) * log(c_sg))


def cor43_diffusion(kappa, t, k_inf):
    c = 2 * t if kappa == 0 else (1 - exp(-2 * kappa * t)) / kappa
    return 6 * c * k_inf * (1 + log(k_inf))


def cor44_two_mixture(c0, c1, k):
    return 6 * max(c0, c1) * k * (1 + log(1 + k))


def cor45_hypercube(k_ls, k_chi2, k):
    return 6 * k * k_ls * (1 + k_chi2) ** k * (1 + log(1 + k_chi2))


def cor45_bernoulli(p, k):
    return 6 * k / (p ** (k - 1) * (1 - 2 * p)) * log(1 / p) ** 2


def propA_tighten(c, d, c_p):
    return c + c_p * (d / 2 + 1)


POINTS = {
    "thm31_pi": [
        dict(k_p=1.0, k=1.0, p=2.0), dict(k_p=0.5, k=3.0, p=2.0), dict(k_p=2.0, k=1.5, p=4.0),
        dict(k_p=0.1, k=10.0, p=1.5), dict(k_p=3.0, k=2.0, p="inf"), dict(k_p=1.25, k=7.5, p=3.0),
        dict(k_p=0.75, k=100.0, p=10.0), dict(k_p=4.0, k=1.01, p=1.1), dict(k_p=0.2, k=50.0, p="inf"),
        dict(k_p=1.0, k=2.718281828459045, p=2.5),
    ],
    "thm31_lsi": [
        dict(k_ls=1.0, k=1.0, p=2.0), dict(k_ls=0.5, k=3.0, p=2.0), dict(k_ls=2.0, k=1.5, p=4.0),
        dict(k_ls=0.1, k=10.0, p=1.5), dict(k_ls=3.0, k=2.0, p="inf"), dict(k_ls=1.25, k=7.5, p=3.0),
        dict(k_ls=0.75, k=100.0, p=10.0), dict(k_ls=4.0, k=1.01, p=1.1), dict(k_ls=0.2, k=50.0, p="inf"),
        dict(k_ls=1.0, k=2.718281828459045, p=2.5),
    ],
    "cor41_gauss": [
        dict(R=1.0, t=1.0), dict(R=0.0, t=1.0), dict(R=1.0, t=0.25), dict(R=2.0, t=3.0), dict(R=0.5, t=0.1),
        dict(R=1.0, t=4.0), dict(R=3.0, t=1.0), dict(R=0.1, t=0.01), dict(R=1.5, t=10.0), dict(R=1.0, t=0.125),
    ],
    "cor41_t2": [
        dict(R=1.0, t=1.0), dict(R=0.0, t=2.0), dict(R=1.0, t=0.5), dict(R=2.0, t=1.0), dict(R=0.25, t=0.1),
        dict(R=1.0, t=8.0), dict(R=2.5, t=2.0), dict(R=0.3, t=0.02), dict(R=4.0, t=20.0), dict(R=1.0, t=0.2),
    ],
    "rem3_large_t": [
        dict(R=1.0, t=4.0), dict(R=0.0, t=1.0), dict(R=0.5, t=1.0), dict(R=1.0, t=10.0), dict(R=2.0, t=16.0),
        dict(R=0.1, t=0.05), dict(R=3.0, t=100.0), dict(R=1.5, t=9.0), dict(R=0.25, t=0.3), dict(R=10.0, t=400.0),
    ],
    "rem3_lower": [
        dict(R=1.0, t=1.0), dict(R=1.0, t=0.125), dict(R=1.0, t=0.25), dict(R=1.0, t=0.5), dict(R=2.0, t=0.1),
        dict(R=0.5, t=2.0), dict(R=3.0, t=0.5), dict(R=0.1, t=0.001), dict(R=5.0, t=1.0), dict(R=1.0, t=0.01),
    ],
    "thm42_pi": [
        dict(sigma2=1.0, c_sg=2.0, t=2.0), dict(sigma2=1.0, c_sg=2.0, t=4.0), dict(sigma2=0.25, c_sg=1.0, t=0.5),
        dict(sigma2=0.5, c_sg=10.0, t=0.75), dict(sigma2=2.0, c_sg=1.5, t=2.5), dict(sigma2=1.0, c_sg=100.0, t=1.1),
        dict(sigma2=0.1, c_sg=3.0, t=5.0), dict(sigma2=4.0, c_sg=1.2, t=16.0), dict(sigma2=1.0, c_sg=7.0, t=3.0),
        dict(sigma2=0.01, c_sg=1.01, t=0.02),
    ],
    "thm42_lsi": [
        dict(sigma2=1.0, c_sg=2.0, t=2.0), dict(sigma2=1.0, c_sg=2.0, t=4.0), dict(sigma2=0.25, c_sg=1.0, t=0.5),
        dict(sigma2=0.5, c_sg=10.0, t=0.75), dict(sigma2=2.0, c_sg=1.5, t=2.5), dict(sigma2=1.0, c_sg=100.0, t=1.1),
        dict(sigma2=0.1, c_sg=3.0, t=5.0), dict(sigma2=4.0, c_sg=1.2, t=16.0), dict(sigma2=1.0, c_sg=7.0, t=3.0),
        dict(sigma2=0.01, c_sg=1.01, t=0.02),
    ],
    "cor43_diffusion": [
        dict(kappa=0.0, t=1.0, k_inf=1.0), dict(kappa=1.0, t=1.0, k_inf=2.0), dict(kappa=-1.0, t=0.5, k_inf=3.0),
        dict(kappa=0.5, t=2.0, k_inf=10.0), dict(kappa=2.0, t=0.01, k_inf=1.5), dict(kappa=-0.25, t=4.0, k_inf=1.1),
        dict(kappa=0.0, t=0.3, k_inf=50.0), dict(kappa=10.0, t=1.0, k_inf=7.0), dict(kappa=1e-3, t=1.0, k_inf=2.5),
        dict(kappa=-2.0, t=0.1, k_inf=100.0),
    ],
    "cor44_two_mixture": [
        dict(c0=1.0, c1=1.0, k=1.0), dict(c0=0.5, c1=2.0, k=3.0), dict(c0=3.0, c1=1.0, k=0.5),
        dict(c0=0.1, c1=0.2, k=10.0), dict(c0=1.0, c1=1.0, k=0.01), dict(c0=5.0, c1=5.5, k=2.0),
        dict(c0=0.25, c1=0.125, k=100.0), dict(c0=2.0, c1=2.0, k=1e-6), dict(c0=1.5, c1=0.5, k=7.25),
        dict(c0=10.0, c1=20.0, k=1.0),
    ],
    "cor45_hypercube": [
        dict(k_ls=0.2, k_chi2=1.0, k=1), dict(k_ls=0.2, k_chi2=1.0, k=2), dict(k_ls=0.5, k_chi2=3.0, k=3),
        dict(k_ls=1.0, k_chi2=0.0, k=1), dict(k_ls=0.1, k_chi2=8.0, k=4), dict(k_ls=0.25, k_chi2=0.5, k=10),
        dict(k_ls=2.0, k_chi2=2.0, k=5), dict(k_ls=0.3, k_chi2=0.1, k=2), dict(k_ls=0.05, k_chi2=20.0, k=3),
        dict(k_ls=1.5, k_chi2=1.5, k=7),
    ],
    "cor45_bernoulli": [
        dict(p=0.25, k=2), dict(p=0.25, k=1), dict(p=0.1, k=1), dict(p=0.1, k=3), dict(p=0.4, k=2),
        dict(p=0.01, k=2), dict(p=0.3, k=5), dict(p=0.45, k=1), dict(p=0.2, k=4), dict(p=0.05, k=6),
    ],
    "propA_tighten": [
        dict(c=1.0, d=0.0, c_p=1.0), dict(c=0.0, d=2.0, c_p=0.5), dict(c=2.5, d=1.0, c_p=3.0),
        dict(c=0.1, d=10.0, c_p=0.2), dict(c=4.0, d=0.5, c_p=0.0), dict(c=1.0, d=3.0, c_p=1.0),
        dict(c=0.75, d=0.25, c_p=2.0), dict(c=100.0, d=7.0, c_p=50.0), dict(c=0.5, d=100.0, c_p=0.01),
        dict(c=3.0, d=1.5, c_p=4.5),
    ],
}

FUNCS = {
    "thm31_pi": thm31_pi, "thm31_lsi": thm31_lsi, "cor41_gauss": cor41, "cor41_t2": cor41,
    "rem3_large_t": rem3_large_t, "rem3_lower": rem3_lower, "thm42_pi": thm42_pi, "thm42_lsi": thm42_lsi,
    "cor43_diffusion": cor43_diffusion, "cor44_two_mixture": cor44_two_mixture,
    "cor45_hypercube": cor45_hypercube, "cor45_bernoulli": cor45_bernoulli, "propA_tighten": propA_tighten,
}


def to_mp(v):
    if v == "inf":
        return inf
    if isinstance(v, int):
        return v
    return mpf(float(v))


def main():
    out = Path(__file__).resolve().parent.parent / "data" / "formula_reference.tsv"
    lines = ["# formula\tinputs\texpected"]
    for fid, points in POINTS.items():
        assert len(points) == 10, fid
        for pt in points:
            value = FUNCS[fid](**{k: to_mp(v) for k, v in pt.items()})
            inputs = ",".join(f"{k}={v}" for k, v in pt.items())
            lines.append(f"{fid}\t{inputs}\t{mp.nstr(value, 25, strip_zeros=False)}")
    out.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
