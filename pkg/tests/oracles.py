"""Independent oracles: symbolic Ricci tensors from Christoffel symbols and plain
finite differences. Nothing here imports the package under test."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import sympy as sp


def ricci_tensor(g: sp.Matrix, coords: list) -> sp.Matrix:
    """Ricci tensor R_ij = d_k G^k_ij - d_j G^k_ik + G^k_kl G^l_ij - G^k_jl G^l_ik."""
    n = len(coords)
    ginv = g.inv()
    gam = [[[sp.simplify(sum(ginv[k, l] * (sp.diff(g[l, i], coords[j]) + sp.diff(g[l, j], coords[i])
                                          - sp.diff(g[i, j], coords[l])) for l in range(n)) / 2)
             for j in range(n)] for i in range(n)] for k in range(n)]
    ric = sp.zeros(n, n)
    for i in range(n):
        for j in range(n):
            expr = 0
            for k in range(n):
                expr += sp.diff(gam[k][i][j], coords[k]) - sp.diff(gam[k][i][k], coords[j])
                for l in range(n):
                    expr += gam[k][k][l] * gam[l][i][j] - gam[k][j][l] * gam[l][i][k]
            ric[i, j] = sp.simplify(expr)
    return ric


@lru_cache(maxsize=None)
def doubly_warped_oracle(phi_src: str, psi_src: str):
    """Returns a numeric function t -> (Ric_tt, Ric_xx/phi^2, Ric_yy/psi^2, H) for
    dt^2 + phi^2 dx^2 + psi^2 dy^2 with phi, psi given as sympy source in t."""
    t, x, y = sp.symbols("t x y", real=True)
    phi = sp.sympify(phi_src, locals={"t": t})
    psi = sp.sympify(psi_src, locals={"t": t})
    g = sp.diag(1, phi**2, psi**2)
    ric = ricci_tensor(g, [t, x, y])
    H = sp.diff(sp.log(phi * psi), t)
    exprs = [ric[0, 0], ric[1, 1] / phi**2, ric[2, 2] / psi**2, H]
    return _broadcast(sp.lambdify(t, exprs, "numpy"))


@lru_cache(maxsize=None)
def sphere_warped_oracle(w_src: str):
    """Ricci eigenvalues of d theta^2 + w^2 (da^2 + sin^2 a db^2), evaluated at a = pi/3."""
    th, a, b = sp.symbols("theta a b", real=True)
    w = sp.sympify(w_src, locals={"theta": th})
    g = sp.diag(1, w**2, w**2 * sp.sin(a) ** 2)
    ric = ricci_tensor(g, [th, a, b])
    exprs = [ric[0, 0], ric[1, 1] / w**2, ric[2, 2] / (w**2 * sp.sin(a) ** 2)]
    exprs = [e.subs(a, sp.pi / 3) for e in exprs]
    return _broadcast(sp.lambdify(th, exprs, "numpy"))


@lru_cache(maxsize=None)
def radial_oracle(alpha_src: str, beta_src: str):
    """Ricci eigenvalues of alpha(r)^2 dr^2 + beta(r)^2 g_S2, evaluated at a = pi/3."""
    r, a, b = sp.symbols("r a b", positive=True)
    alpha = sp.sympify(alpha_src, locals={"r": r})
    beta = sp.sympify(beta_src, locals={"r": r})
    g = sp.diag(alpha**2, beta**2, beta**2 * sp.sin(a) ** 2)
    ric = ricci_tensor(g, [r, a, b])
    exprs = [ric[0, 0] / alpha**2, ric[1, 1] / beta**2, ric[2, 2] / (beta**2 * sp.sin(a) ** 2)]
    exprs = [sp.simplify(e.subs(a, sp.pi / 3)) for e in exprs]
    return _broadcast(sp.lambdify(r, exprs, "numpy"))


def _broadcast(fn):
    def wrapped(x):
        x = np.asarray(x, dtype=float)
        return np.array([np.broadcast_to(np.asarray(v, dtype=float), x.shape) for v in fn(x)])
    return wrapped


def fd1(fn, x, h=1e-4):
    """Five-point first derivative."""
    return (-fn(x + 2 * h) + 8 * fn(x + h) - 8 * fn(x - h) + fn(x - 2 * h)) / (12 * h)


def fd2(fn, x, h=1e-3):
    """Five-point second derivative."""
    return (-fn(x + 2 * h) + 16 * fn(x + h) - 30 * fn(x) + 16 * fn(x - h) - fn(x - 2 * h)) / (12 * h * h)


def observed_order(hs, errs) -> float:
    """Least-squares slope of log(err) against log(h)."""
    hs, errs = np.asarray(hs, float), np.abs(np.asarray(errs, float))
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
