"""Brute-force scalar reference for the eq10 ensembles.

Independent of the C++ code: numpy RNG, direct per-(n, j) kernel formulas,
no lag tables, all paths vectorised. Produces the ensemble statistics that
the acceptance fixture thresholds are derived from.

    python3 tests/oracles/brute_force_fig1.py [n_paths]
"""
import json
import math
import sys

import numpy as np

CASES = {
    "a": (0.6, 0.3, 3.0),
    "b": (0.6, 1.1, 0.6),
    "c": (0.85, 0.3, 0.6),
    "d": (0.85, 1.9, 3.0),
}


def coupled_sup_errors(beta, alpha, gamma, eps, c, x0, T, h, n_paths, rng,
                       linear=False):
    n = int(round(T / h))
    t = h * np.arange(n + 1)
    gb = math.gamma(beta)
    # int_0^c x^4 gamma x^{-1-alpha} dx
    k_nu = gamma * c ** (4 - alpha) / (4 - alpha)
    gamma1 = k_nu / math.sqrt(eps)
    dB = rng.standard_normal((n_paths, n)) * math.sqrt(h)

    X = np.empty((n_paths, n + 1))
    Z = np.empty((n_paths, n + 1))
    X[:, 0] = x0
    Z[:, 0] = x0
    fx = np.empty((n_paths, n))
    fz = np.empty((n_paths, n))
    for m in range(1, n + 1):
        j = m - 1
        if linear:
            fx[:, j] = eps * X[:, j] * math.cos(t[j]) ** 2
            fz[:, j] = eps * Z[:, j] * 0.5
        else:
            fx[:, j] = (eps * 2.0 * X[:, j] * math.cos(t[j]) ** 2
                        + math.sqrt(eps) * 2.0 * math.sin(t[j]) ** 2 * k_nu * X[:, j])
            fz[:, j] = eps * Z[:, j] * (1.0 + gamma1)
        tj = t[:m]
        w = ((t[m] - tj) ** beta
             - np.maximum(t[m] - (tj + h), 0.0) ** beta) / beta
        b = (t[m] - tj) ** (beta - 1.0)
        stoch = math.sqrt(eps) * (dB[:, :m] @ b)
        X[:, m] = x0 + (fx[:, :m] @ w + stoch) / gb
        Z[:, m] = x0 + (fz[:, :m] @ w + stoch) / gb
    d = np.abs(X - Z)
    return (d ** 2).max(axis=1), d.max(axis=1)


def summary(sq, er):
    n = len(sq)
    return {
        "mean_sup_sq": float(sq.mean()),
        "se_sup_sq": float(sq.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
        "mean_sup_er": float(er.mean()),
        "se_sup_er": float(er.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
    }


def fit_slope(eps, means):
    x = np.log(np.asarray(eps))
    y = np.log(np.asarray(means))
    return float(np.polyfit(x, y, 1)[0])


def main():
    n_paths = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
    T, h, c, x0 = 10.0, 1e-2, 0.5, 0.1
    out = {"n_paths": n_paths, "T": T, "h": h, "fig1": {}, "study": {}}
    for case, (beta, alpha, gamma) in CASES.items():
        rng = np.random.default_rng(20240 + ord(case))
        sq, er = coupled_sup_errors(beta, alpha, gamma, 1e-3, c, x0, T, h,
                                    n_paths, rng)
        out["fig1"][case] = summary(sq, er)
        print(case, out["fig1"][case], flush=True)

    for name, linear in (("eq10", False), ("eq10-linear", True)):
        eps_grid = [1e-2, 1e-3, 1e-4]
        means = []
        beta, alpha, gamma = CASES["a"]
        for eps in eps_grid:
            rng = np.random.default_rng(777)  # common random numbers
            sq, _ = coupled_sup_errors(beta, alpha, gamma, eps, c, x0, T, h,
                                       n_paths, rng, linear=linear)
            means.append(float(sq.mean()))
        out["study"][name] = {"eps": eps_grid, "mean_sup_sq": means,
                              "slope": fit_slope(eps_grid, means)}
        print(name, out["study"][name], flush=True)
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
