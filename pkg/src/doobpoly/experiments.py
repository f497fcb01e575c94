"""Named two-sided Monte-Carlo comparisons.

Each experiment simulates a conditioned (h-transformed) model on one side and
an independent geometric construction on the other, then compares terminal
laws with pinned seeds.
"""
from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from typing import Callable

import numpy as np

from . import models
from .diffop import scaled, to_real
from .simkit import (
    GeneratorRow,
    SimConfig,
    conditioned_paths,
    dyson_paths,
    generator_check,
    matrix_brownian,
    matrix_coordinates,
    matrix_source,
    random_matrix_start,
    sde_paths,
    spectral_map,
)
from .stats import ComparisonReport, energy_permutation_test, ks_two_sample

__all__ = [
    "load_defaults",
    "EXPERIMENTS",
    "run_experiment",
    "rotation_with_first_row",
    "shift_permutation",
    "GENERATOR_TABLES",
    "generator_suite",
]


def load_defaults() -> dict:
    text = resources.files("doobpoly").joinpath("defaults.json").read_text()
    return json.loads(text)


def rotation_with_first_row(u) -> np.ndarray:
    """A matrix in SO(d) whose first row is the unit vector u."""
    u = np.asarray(u, dtype=float)
    d = u.size
    # complete u with the standard basis minus the direction u leans on most
    k = int(np.argmax(np.abs(u)))
    cols = [u] + [np.eye(d)[:, j] for j in range(d) if j != k]
    Q, R = np.linalg.qr(np.stack(cols, axis=1))
    Q = Q * np.sign(np.diag(R))[None, :]
    O = Q.T
    if np.linalg.det(O) < 0:
        O[-1] *= -1
    return O


def shift_permutation(D: int, q: int) -> np.ndarray:
    """Cyclic permutation matrix in SO(D) with O[i, (i + q) mod D] = +-1.

    Its top-left p x q block vanishes whenever p + q <= D.
    """
    O = np.zeros((D, D))
    O[np.arange(D), (np.arange(D) + q) % D] = 1.0
    if np.linalg.det(O) < 0:
        O[-1] *= -1
    return O


def _ks(label, a, b, thr) -> ComparisonReport:
    v = ks_two_sample(a, b)
    return ComparisonReport("ks", v, len(a), len(b), thr, bool(v < thr), label)


def _energy(label, a, b, p, seed) -> ComparisonReport:
    r = energy_permutation_test(a, b, n_perm=p["n_perm"], cap=p["cap"], seed=seed)
    r.label = label
    return r


def bessel13(p: dict) -> list[ComparisonReport]:
    """|1-d BM| conditioned by h(x) = x against the norm of 3-d BM."""
    x0 = float(p["x0"])
    cfg = SimConfig(p["t"], p["dt"], p["n_paths"], p["seed"])
    cond = conditioned_paths(models.bessel_hat(1), [x0 * x0], cfg)
    cfg3 = SimConfig(p["t"], p["dt"], p["n_paths"], p["seed"] + 1)
    bm3 = sde_paths(models.brownian(3), [x0, 0.0, 0.0], cfg3)
    return [_ks("sqrt(conditioned bessel_hat(1)) vs |BM^3|",
                np.sqrt(cond.points[:, 0]), np.linalg.norm(bm3.points, axis=1), p["ks_threshold"])]


def jacobi_chebyshev(p: dict) -> list[ComparisonReport]:
    """jacobi(1/2, 1/2) conditioned against one SO(4) entry (the S^3 coordinate)."""
    x0 = float(p["x0"])
    cfg = SimConfig(p["t"], p["dt"], p["n_paths"], p["seed"])
    cond = conditioned_paths(models.jacobi(Fraction(1, 2), Fraction(1, 2)), [x0], cfg)
    start = rotation_with_first_row([x0, np.sqrt(1 - x0 * x0), 0, 0])
    ens = matrix_brownian("SOd", 4, SimConfig(p["t"], p["dt"], p["n_paths"], p["seed"] + 1), start=start)
    return [_ks("conditioned jacobi(1/2,1/2) vs SO(4) m_11", cond.points[:, 0],
                ens.matrices[:, 0, 0], p["ks_threshold"])]


def ou_laguerre(p: dict) -> list[ComparisonReport]:
    """2 laguerre(1/2) conditioned, mapped by sqrt(2y), against |OU in R^3|."""
    x0 = float(p["x0"])
    cfg = SimConfig(p["t"], p["dt"], p["n_paths"], p["seed"])
    m = scaled(models.laguerre(Fraction(1, 2)), 2)
    cond = conditioned_paths(m, [x0 * x0 / 2], cfg)
    ou = sde_paths(models.ou(3), [x0, 0, 0], SimConfig(p["t"], p["dt"], p["n_paths"], p["seed"] + 1))
    return [_ks("sqrt(2 y), y conditioned 2*laguerre(1/2), vs |OU^3|",
                np.sqrt(2 * cond.points[:, 0]), np.linalg.norm(ou.points, axis=1), p["ks_threshold"])]


def deltoid_su3(p: dict) -> list[ComparisonReport]:
    """deltoid(4) at time 8t/3 from Z = 1 against tr(g)/3 on SU(3) at time t."""
    t = float(p["t"])
    m = to_real(models.deltoid(4))
    cfg = SimConfig(8 * t / 3, p["dt"], p["n_paths"], p["seed"])
    delt = sde_paths(m, [1.0, 0.0], cfg, boundary_start=True)
    ens = matrix_brownian("SU3", 3, SimConfig(t, p["dt"], p["n_paths"], p["seed"] + 1))
    tr = spectral_map(ens, "trace_su3").points
    return [_energy("deltoid(4) at 8t/3 vs SU(3) trace at t", delt.points, tr, p, p["seed"] + 2)]


def ball_sphere(p: dict) -> list[ComparisonReport]:
    """ball(2, 2) conditioned against two coordinates of a point on S^4 (SO(5) row)."""
    x0 = np.asarray(p["x0"], dtype=float)
    cfg = SimConfig(p["t"], p["dt"], p["n_paths"], p["seed"])
    cond = conditioned_paths(models.ball(2, 2), x0, cfg)
    row = np.concatenate([x0, [np.sqrt(1 - x0 @ x0)], np.zeros(2)])
    ens = matrix_brownian("SOd", 5, SimConfig(p["t"], p["dt"], p["n_paths"], p["seed"] + 1),
                          start=rotation_with_first_row(row))
    other = ens.matrices[:, 0, :2]
    return [_energy("conditioned ball(2,2) vs S^4 coordinates", cond.points, other, p, p["seed"] + 2)]


def matrix_jacobi_exp(p: dict) -> list[ComparisonReport]:
    """matrix_jacobi(p, q, p+q) conditioned against the p x q block of SO(p+q+2)."""
    pp, qq = int(p["p"]), int(p["q"])
    d = pp + qq
    m = models.matrix_jacobi(pp, qq, d)
    cfg = SimConfig(p["t"], p["dt"], p["n_paths"], p["seed"])
    cond = conditioned_paths(m, np.zeros(pp * qq), cfg)
    ens = matrix_brownian("SOd", d + 2, SimConfig(p["t"], p["dt"], p["n_paths"], p["seed"] + 1),
                          start=shift_permutation(d + 2, qq))
    block = spectral_map(ens, "first_column_block", pp, qq).points
    if pp * qq == 1:
        return [_ks(f"conditioned matrix_jacobi(1,1,{d}) vs SO({d + 2}) m_11",
                    cond.points[:, 0], block[:, 0], p["ks_threshold"])]
    return [_energy(f"conditioned matrix_jacobi({pp},{qq},{d}) vs SO({d + 2}) block",
                    cond.points, block, p, p["seed"] + 2)]


def _spectrum_start(d: int) -> np.ndarray:
    return np.arange(d, dtype=float) - (d - 1) / 2


def weyl_dyson_exp(p: dict) -> list[ComparisonReport]:
    """Weyl-chamber BM conditioned (Vandermonde drift) against Hermitian spectra."""
    d = int(p["d"])
    x0 = _spectrum_start(d)
    cfg = SimConfig(p["t"], p["dt"], p["n_paths"], p["seed"])
    dy = dyson_paths(x0, cfg)
    ens = matrix_brownian("hermitian", d, SimConfig(p["t"], p["dt"], p["n_paths"], p["seed"] + 1),
                          start=np.diag(x0))
    ev = spectral_map(ens, "spectrum_sorted").points
    out = [_ks(f"ordered eigenvalue {k}", dy.points[:, k], ev[:, k], p["ks_threshold"]) for k in range(d)]
    if p.get("engine"):
        a0 = np.poly(x0)[::-1][:-1].real
        eng = conditioned_paths(models.weyl_dyson(d, Fraction(-1, 2)), a0,
                                SimConfig(p["t"], p["dt"], p["n_paths"], p["seed"] + 2))
        roots = np.sort(np.array([np.roots(np.r_[1.0, a[::-1]]).real for a in eng.points]), axis=1)
        out += [_ks(f"coefficient-engine eigenvalue {k}", roots[:, k], ev[:, k], p["ks_threshold"])
                for k in range(d)]
    return out


EXPERIMENTS: dict[str, Callable[[dict], list[ComparisonReport]]] = {
    "bessel13": bessel13,
    "jacobi-chebyshev": jacobi_chebyshev,
    "ou-laguerre": ou_laguerre,
    "deltoid-su3": deltoid_su3,
    "ball-sphere": ball_sphere,
    "matrix-jacobi": matrix_jacobi_exp,
    "weyl-dyson": weyl_dyson_exp,
}


def run_experiment(name: str, overrides: dict | None = None) -> list[ComparisonReport]:
    if name not in EXPERIMENTS:
        raise KeyError(f"unknown experiment {name!r}; known: {sorted(EXPERIMENTS)}")
    params = dict(load_defaults()["experiments"][name])
    for k, v in (overrides or {}).items():
        if v is not None:
            params[k] = v
    return EXPERIMENTS[name](params)


# ---------------------------------------------------------------------------
# short-time generator checks

GENERATOR_TABLES = {
    "SOd": (4, models.so_table),
    "SU3": (3, models.su_table),
    "hermitian": (3, models.hermitian_table),
    "symmetric": (3, models.symmetric_table),
}


def generator_suite(kind: str, overrides: dict | None = None) -> list[GeneratorRow]:
    """Every degree <= 2 monomial of the kind's table, one step from a random start."""
    p = dict(load_defaults()["generator_check"])
    p.update({k: v for k, v in (overrides or {}).items() if v is not None})
    d = int(p.get("d") or GENERATOR_TABLES[kind][0])
    table = GENERATOR_TABLES[kind][1](d)
    M0 = random_matrix_start(kind, d, np.random.default_rng(p["start_seed"]))
    x0 = matrix_coordinates(kind, M0[None])[0]
    return generator_check(matrix_source(kind, d, M0), table, None, p["dt"], x0, int(p["n_paths"]), p["seed"])
