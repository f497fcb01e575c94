"""Monte-Carlo simulation of polynomial diffusions and matrix Brownian motions.

SDEs use the convention ``L = sum g^{ij} d_ij + sum b^i d_i`` so the noise
matrix satisfies ``sigma sigma^T = 2 g``.  All randomness comes from a
single ``numpy.random.Generator`` seeded from the config, so runs are
bit-reproducible.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .diffop import DiffusionModel, h_transform, l_apply
from .polyring import GaussRat, Poly, grlex_monomials

__all__ = [
    "SimConfig",
    "EnsembleSample",
    "MatrixEnsemble",
    "sde_paths",
    "conditioned_paths",
    "dyson_paths",
    "matrix_brownian",
    "matrix_increment",
    "generator_check",
    "GeneratorRow",
    "matrix_coordinates",
    "matrix_source",
    "random_matrix_start",
    "spectral_map",
    "sample_to_csv",
    "sample_summary",
]

POLICIES = ("reject-step", "halve-dt", "absorb")
MAX_REJECT = 10
REPROJECT_EVERY = 100
ROUNDOFF_FLOOR = 1e-9


@dataclass(frozen=True)
class SimConfig:
    t_final: float
    dt: float
    n_paths: int
    seed: int = 0
    boundary_policy: str = "reject-step"
    scheme: str = "euler-maruyama"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_final != 0 and self.t_final < self.dt:
            raise ValueError("t_final must be 0 or at least dt")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.boundary_policy not in POLICIES:
            raise ValueError(f"boundary_policy must be one of {POLICIES}")
        if self.scheme != "euler-maruyama":
            raise ValueError("only the euler-maruyama scheme is implemented")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


@dataclass
class EnsembleSample:
    label: str
    time: float
    points: np.ndarray
    seed: int
    rejected_step_count: int = 0
    names: tuple = ()
    absorbed_count: int = 0
    dt: float = 0.0

    def column(self, k: int) -> np.ndarray:
        return self.points[:, k]


@dataclass
class MatrixEnsemble:
    kind: str
    d: int
    time: float
    matrices: np.ndarray
    seed: int
    meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Euler-Maruyama for DiffusionModel

class _Compiled:
    """Numeric tables for one real model."""

    def __init__(self, m: DiffusionModel):
        if not m.is_real():
            raise ValueError("simulate models in real coordinates; apply diffop.to_real first")
        n = m.nvars
        self.n = n
        self.drift = kernels.PolyTable(m.drift, n)
        self.gamma = kernels.PolyTable([g for row in m.gamma for g in row], n)
        preds = [P for P, _ in m.boundary] + list(m.domain.positive)
        self.preds = kernels.PolyTable(preds, n)

    def inside(self, X, tol=0.0) -> np.ndarray:
        if not self.preds.npoly:
            return np.ones(len(X), dtype=bool)
        return (kernels.eval_table(self.preds, X) > -tol).all(axis=1)


def sde_paths(m: DiffusionModel, x0, cfg: SimConfig, boundary_start: bool = False) -> EnsembleSample:
    """Terminal points of Euler-Maruyama paths of ``m`` started at ``x0``.

    Each path advances with its own step size.  A proposal leaving the domain
    (some boundary or domain polynomial not > 0) is handled by the config's
    boundary policy: ``reject-step`` redraws the noise and halves the step
    after 10 consecutive rejections, ``halve-dt`` halves the step on every
    rejection, ``absorb`` freezes the path.  Accepted steps double the step
    size back up to ``dt``.  ``boundary_start`` allows ``x0`` on the
    boundary (polynomials >= 0).
    """
    tab = _Compiled(m)
    n = tab.n
    x0 = np.asarray(x0, dtype=float).reshape(n)
    start = x0[None, :]
    if boundary_start:
        if not tab.inside(start, tol=1e-12)[0]:
            raise ValueError("x0 lies outside the closed domain")
    elif not tab.inside(start)[0]:
        raise ValueError("x0 must be strictly inside the domain")
    P = cfg.n_paths
    X = np.repeat(start, P, axis=0)
    rng = cfg.rng()
    t_rem = np.full(P, float(cfg.t_final))
    h = np.full(P, float(cfg.dt))
    streak = np.zeros(P, dtype=np.int64)
    alive = np.ones(P, dtype=bool)
    rejected = 0
    eps = 1e-12 * max(cfg.t_final, 1.0)
    h_floor = cfg.dt * 2.0 ** -40
    while True:
        idx = np.nonzero(alive & (t_rem > eps))[0]
        if idx.size == 0:
            break
        hh = np.minimum(h[idx], t_rem[idx])
        Z = rng.standard_normal((idx.size, n))
        Y, ok, bad = kernels.em_propose(X[idx], hh, Z, tab.drift, tab.gamma, tab.preds)
        if bad:
            raise FloatingPointError("diffusion matrix is not positive semidefinite beyond jitter")
        acc, rej = idx[ok], idx[~ok]
        X[acc] = Y[ok]
        t_rem[acc] -= hh[ok]
        h[acc] = np.minimum(cfg.dt, 2 * h[acc])
        streak[acc] = 0
        rejected += rej.size
        if rej.size:
            if cfg.boundary_policy == "absorb":
                alive[rej] = False
            elif cfg.boundary_policy == "halve-dt":
                h[rej] *= 0.5
            else:
                streak[rej] += 1
                hit = rej[streak[rej] >= MAX_REJECT]
                h[hit] *= 0.5
                streak[hit] = 0
            if (h[rej] < h_floor).any():
                raise RuntimeError("step size collapsed near the boundary")
    return EnsembleSample(
        m.label, float(cfg.t_final), X, cfg.seed, rejected, m.names,
        int((~alive).sum()), cfg.dt,
    )


def conditioned_paths(m: DiffusionModel, x0, cfg: SimConfig, boundary_start: bool = False) -> EnsembleSample:
    """Paths of the h-transform of ``m`` (drift b - 2 sum alpha_r L_{i,r})."""
    ht = h_transform(m).model
    return sde_paths(ht, x0, cfg, boundary_start=boundary_start)


def dyson_paths(x0: Sequence[float], cfg: SimConfig, beta: float = 2.0) -> EnsembleSample:
    """Ordered particles dx_i = beta sum_j 1/(x_i - x_j) dt + sqrt(2) dB_i.

    Brownian motion with generator the Laplacian conditioned to stay in the
    Weyl chamber (beta = 2).  Steps that break the ordering follow the
    reject-step policy.
    """
    x0 = np.sort(np.asarray(x0, dtype=float))
    if np.any(np.diff(x0) <= 0):
        raise ValueError("x0 must have distinct entries")
    d = x0.size
    P = cfg.n_paths
    X = np.repeat(x0[None, :], P, axis=0)
    rng = cfg.rng()
    t_rem = np.full(P, float(cfg.t_final))
    h = np.full(P, float(cfg.dt))
    streak = np.zeros(P, dtype=np.int64)
    rejected = 0
    eps = 1e-12 * max(cfg.t_final, 1.0)
    while True:
        idx = np.nonzero(t_rem > eps)[0]
        if idx.size == 0:
            break
        hh = np.minimum(h[idx], t_rem[idx])
        x = X[idx]
        diff = x[:, :, None] - x[:, None, :]
        np.einsum("bii->bi", diff)[:] = np.inf
        drift = beta * (1.0 / diff).sum(axis=2)
        Y = x + drift * hh[:, None] + np.sqrt(2 * hh)[:, None] * rng.standard_normal(x.shape)
        ok = (np.diff(Y, axis=1) > 0).all(axis=1)
        acc, rej = idx[ok], idx[~ok]
        X[acc] = Y[ok]
        t_rem[acc] -= hh[ok]
        h[acc] = np.minimum(cfg.dt, 2 * h[acc])
        streak[acc] = 0
        rejected += rej.size
        streak[rej] += 1
        hit = rej[streak[rej] >= MAX_REJECT]
        h[hit] *= 0.5
        streak[hit] = 0
    names = tuple(f"x{i}" for i in range(d))
    return EnsembleSample(f"dyson(beta={beta})", float(cfg.t_final), X, cfg.seed, rejected, names, 0, cfg.dt)


# ---------------------------------------------------------------------------
# matrix Brownian motions

MATRIX_KINDS = ("SOd", "SU3", "hermitian", "symmetric")
SU3_SCALE2 = 8.0  # s^2 giving the scale-2 Casimir table


def _antisym(rng, B, d):
    A = np.zeros((B, d, d))
    iu = np.triu_indices(d, 1)
    A[:, iu[0], iu[1]] = rng.standard_normal((B, len(iu[0])))
    return A - A.transpose(0, 2, 1)


def _gue_traceless(rng, B, d):
    """Hermitian H with E[H_ab H_cd] = delta_ad delta_bc - delta_ab delta_cd / d."""
    G = (rng.standard_normal((B, d, d)) + 1j * rng.standard_normal((B, d, d))) / np.sqrt(2)
    H = (G + G.conj().transpose(0, 2, 1)) / np.sqrt(2)
    tr = np.trace(H, axis1=1, axis2=2).real
    return H - (tr / d)[:, None, None] * np.eye(d)[None]


def _expm(A, terms: int = 12):
    """Batched matrix exponential by scaling and squaring a Taylor series.

    The batch is scaled so every norm is below 1/4, which puts the truncation
    error of 12 terms far below double precision.
    """
    norm = np.abs(A).sum(axis=2).max()
    s = max(0, int(np.ceil(np.log2(norm / 0.25)))) if norm > 0 else 0
    X = A / 2.0 ** s
    eye = np.broadcast_to(np.eye(A.shape[-1], dtype=A.dtype), A.shape)
    E = eye.copy()
    T = eye.copy()
    for j in range(1, terms + 1):
        T = T @ X / j
        E = E + T
    for _ in range(s):
        E = E @ E
    return E


def _reproject_so(O):
    Q, R = np.linalg.qr(O)
    s = np.sign(np.einsum("bii->bi", R))
    s[s == 0] = 1
    return Q * s[:, None, :]


def _reproject_su(U):
    W, _, Vh = np.linalg.svd(U)
    P = W @ Vh
    det = np.linalg.det(P)
    d = U.shape[-1]
    return P / (det ** (1.0 / d))[:, None, None]


def matrix_increment(kind: str, M: np.ndarray, dt: float, rng: np.random.Generator) -> np.ndarray:
    """One step of size dt from the batch of matrices M."""
    B, d, _ = M.shape
    s = np.sqrt(dt)
    if kind == "SOd":
        return M @ _expm(np.sqrt(2.0) * s * _antisym(rng, B, d))
    if kind == "SU3":
        return M @ _expm(1j * np.sqrt(SU3_SCALE2) * s * _gue_traceless(rng, B, d))
    if kind == "hermitian":
        G = (rng.standard_normal((B, d, d)) + 1j * rng.standard_normal((B, d, d))) * s
        iu = np.triu_indices(d, 1)
        dM = np.zeros((B, d, d), dtype=complex)
        dM[:, iu[0], iu[1]] = G[:, iu[0], iu[1]]
        dM = dM + dM.conj().transpose(0, 2, 1)
        idx = np.arange(d)
        dM[:, idx, idx] = np.sqrt(2.0) * s * rng.standard_normal((B, d))
        return M + dM
    if kind == "symmetric":
        A = rng.standard_normal((B, d, d))
        return M + s * (A + A.transpose(0, 2, 1)) / np.sqrt(2.0)
    raise ValueError(f"unknown matrix kind {kind!r}; expected one of {MATRIX_KINDS}")


def _check_kind(kind, d):
    if kind not in MATRIX_KINDS:
        raise ValueError(f"unknown matrix kind {kind!r}; expected one of {MATRIX_KINDS}")
    if kind == "SU3" and d != 3:
        raise ValueError("SU Brownian motion is supported at d = 3")
    if d < 2:
        raise ValueError("matrix dimension must be >= 2")


def matrix_brownian(kind: str, d: int, cfg: SimConfig, start: np.ndarray | None = None) -> MatrixEnsemble:
    """Brownian motion on SO(d), SU(3), Hermitian or real symmetric matrices.

    Group kinds take right-multiplicative exponential steps and are projected
    back to the group every 100 steps.  Hermitian/symmetric kinds use exact
    Gaussian increments, so a single step of length ``t_final`` is used.
    """
    _check_kind(kind, d)
    rng = cfg.rng()
    dtype = complex if kind in ("SU3", "hermitian") else float
    M0 = np.eye(d, dtype=dtype) if start is None else np.asarray(start, dtype=dtype)
    M = np.repeat(M0[None], cfg.n_paths, axis=0)
    T = float(cfg.t_final)
    if T > 0:
        if kind in ("hermitian", "symmetric"):
            M = matrix_increment(kind, M, T, rng)
        else:
            steps = int(np.ceil(T / cfg.dt - 1e-9))
            h = T / steps
            for k in range(1, steps + 1):
                M = matrix_increment(kind, M, h, rng)
                if k % REPROJECT_EVERY == 0 or k == steps:
                    M = _reproject_so(M) if kind == "SOd" else _reproject_su(M)
    return MatrixEnsemble(kind, d, T, M, cfg.seed)


# ---------------------------------------------------------------------------
# spectral maps

def spectral_map(ens: MatrixEnsemble, kind: str, p: int | None = None, q: int | None = None) -> EnsembleSample:
    """Reduce each matrix to the coordinates of an image process.

    ``charpoly_coeffs`` gives a_0..a_{d-1} of det(X I - M) (real parts),
    ``spectrum_sorted`` the ordered eigenvalues (Hermitian/symmetric only),
    ``trace_su3`` (Re Z, Im Z) with Z = tr(g)/3, ``first_column_block`` the
    top-left p x q block flattened row-major.
    """
    M = ens.matrices
    if kind == "charpoly_coeffs":
        coeffs = np.array([np.poly(m) for m in M])
        if ens.kind in ("SU3",):
            raise ValueError("charpoly_coeffs needs a real characteristic polynomial")
        pts = coeffs[:, ::-1][:, :-1].real
        names = tuple(f"a{i}" for i in range(ens.d))
    elif kind == "spectrum_sorted":
        if ens.kind not in ("hermitian", "symmetric"):
            raise ValueError("spectrum_sorted needs a Hermitian or symmetric ensemble")
        pts = np.linalg.eigvalsh(M)
        names = tuple(f"lambda{i}" for i in range(ens.d))
    elif kind == "trace_su3":
        if ens.kind != "SU3":
            raise ValueError("trace_su3 needs an SU3 ensemble")
        Z = np.trace(M, axis1=1, axis2=2) / 3
        pts = np.stack([Z.real, Z.imag], axis=1)
        names = ("ReZ", "ImZ")
    elif kind == "first_column_block":
        if ens.kind != "SOd" or p is None or q is None:
            raise ValueError("first_column_block needs an SOd ensemble and p, q")
        pts = M[:, :p, :q].reshape(len(M), p * q)
        names = tuple(f"n{k}{l}" for k in range(p) for l in range(q))
    else:
        raise ValueError(f"unknown spectral map {kind!r}")
    return EnsembleSample(f"{kind}({ens.kind}, d={ens.d})", ens.time, np.ascontiguousarray(pts), ens.seed, 0, names)


# ---------------------------------------------------------------------------
# generator checks

@dataclass
class GeneratorRow:
    poly: str
    dt: float
    part: str
    estimate: float
    table: float
    stderr: float

    @property
    def z(self) -> float:
        """Deviation in standard errors; the error is floored at rounding level.

        Parts that vanish identically (e.g. Im |z|^2) have a sample stderr of
        pure round-off, so the scale is never taken below ``ROUNDOFF_FLOOR``.
        """
        return abs(self.estimate - self.table) / max(self.stderr, ROUNDOFF_FLOOR)


def matrix_coordinates(kind: str, M: np.ndarray) -> np.ndarray:
    """Values of the table-model variables at a batch of matrices."""
    B, d, _ = M.shape
    if kind == "SOd":
        return M.reshape(B, d * d)
    if kind == "SU3":
        flat = M.reshape(B, d * d)
        return np.concatenate([flat, flat.conj()], axis=1)
    if kind == "hermitian":
        return M.reshape(B, d * d)
    if kind == "symmetric":
        iu = np.triu_indices(d)
        return M[:, iu[0], iu[1]]
    raise ValueError(kind)


def generator_check(
    source: Callable[[float, int, int], np.ndarray],
    table: DiffusionModel,
    test_polys: Sequence[Poly] | None,
    dt_list: Sequence[float],
    x0: np.ndarray,
    n_paths: int,
    seed: int = 0,
) -> list[GeneratorRow]:
    """Compare one-step estimates (E f(X_dt) - f(x0))/dt with L(f)(x0).

    ``source(dt, n_paths, seed)`` returns the coordinates of the table model
    after one step from ``x0``.  ``test_polys`` defaults to all monomials of
    degree <= 2.  Real and imaginary parts are reported separately.
    """
    if test_polys is None:
        test_polys = [Poly.monomial(e) for e in grlex_monomials(table.nvars, 2)]
    x0 = np.asarray(x0)
    pt = [GaussRat.coerce(complex(v)) for v in x0]
    rows = []
    for dt in dt_list:
        Y = source(dt, n_paths, seed)
        for f in test_polys:
            name = str(f)
            target = complex(l_apply(table, f).eval(pt)) if not f.is_constant() else 0j
            vals = (f.eval_numeric(Y.astype(complex)) - f.eval_numeric(x0[None, :].astype(complex))[0]) / dt
            for part, get in (("re", np.real), ("im", np.imag)):
                v = get(vals)
                est = float(v.mean())
                se = float(v.std(ddof=1) / np.sqrt(len(v))) if len(v) > 1 else 0.0
                rows.append(GeneratorRow(name, dt, part, est, float(get(target)), se))
    return rows


def random_matrix_start(kind: str, d: int, rng: np.random.Generator) -> np.ndarray:
    """A generic point of the matrix space (Haar-like for the groups)."""
    _check_kind(kind, d)
    if kind == "SOd":
        Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
        if np.linalg.det(Q) < 0:
            Q[:, 0] *= -1
        return Q
    if kind == "SU3":
        Q, _ = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
        return Q / np.linalg.det(Q) ** (1.0 / d)
    if kind == "hermitian":
        A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        return (A + A.conj().T) / 2
    A = rng.standard_normal((d, d))
    return (A + A.T) / 2


def matrix_source(kind: str, d: int, M0: np.ndarray):
    """One-step simulator closure for :func:`generator_check`."""

    def source(dt, n_paths, seed):
        rng = np.random.default_rng(seed)
        M = np.repeat(np.asarray(M0)[None], n_paths, axis=0)
        return matrix_coordinates(kind, matrix_increment(kind, M, dt, rng))

    return source


# ---------------------------------------------------------------------------
# output

def sample_to_csv(sample: EnsembleSample, fh=None) -> str:
    """CSV with a commented header line and one row per path."""
    buf = io.StringIO() if fh is None else fh
    buf.write(f"# label={sample.label} t={sample.time} dt={sample.dt} seed={sample.seed} "
              f"rejected={sample.rejected_step_count}\n")
    w = csv.writer(buf, lineterminator="\n")
    names = sample.names or tuple(f"x{i}" for i in range(sample.points.shape[1]))
    w.writerow(names)
    for row in sample.points:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue() if fh is None else ""


def sample_summary(sample: EnsembleSample) -> dict:
    P = sample.points
    names = list(sample.names or [f"x{i}" for i in range(P.shape[1])])
    return {
        "label": sample.label,
        "time": sample.time,
        "dt": sample.dt,
        "seed": sample.seed,
        "n_paths": int(P.shape[0]),
        "rejected_step_count": int(sample.rejected_step_count),
        "absorbed_count": int(sample.absorbed_count),
        "moments": {
            n: {"mean": float(P[:, k].mean()), "var": float(P[:, k].var()),
                "m3": float((P[:, k] ** 3).mean()), "m4": float((P[:, k] ** 4).mean())}
            for k, n in enumerate(names)
        },
    }


def summary_json(sample: EnsembleSample) -> str:
    return json.dumps(sample_summary(sample), indent=2)
