"""Sector-by-sector eigensolver for the planar trap Hamiltonian.

Canonical angular momentum commutes with the rotationally symmetric
Hamiltonian, so the two-dimensional problem splits into radial towers
labelled by an integer m.  After the substitution u(rho) = sqrt(rho) psi
each tower is a symmetric tridiagonal eigenproblem on a uniform grid.
This module assembles those operators, solves the bottom of each tower,
and computes the per-state observables the rest of the package consumes.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.linalg import LinAlgError
from scipy.linalg import eigh_tridiagonal

from .core import SIGN_CONVENTION, TrapConfig
from .errors import (
    ConvergenceFailure,
    GridTooSmall,
    NumericalFailure,
    TowerIdentificationError,
)

FLUX_LINE = "flux_line"
FINITE_SOLENOID = "finite_solenoid"
_MODELS = (FLUX_LINE, FINITE_SOLENOID)

# How the sector potential is evaluated on the grid.  Both orders describe
# the same operator and share the same centrifugal stencil; they differ
# only in floating-point rounding.  EXPANDED shifts the flux into
# m' = m + s*alpha and collects the quadratic terms; POTENTIAL builds
# beta(rho) pointwise and squares it as written.
EXPANDED = "expanded"
POTENTIAL = "potential"

# Post-solve wavefunction amplitude allowed at the outer edge, relative to
# the state's peak.
_TAIL_RTOL = 1e-8


def default_outer_radius(config):
    """Outer radius that clears the low towers with a wide margin."""
    return 12.0 * max(1.0, 1.0 / np.sqrt(config.mu * config.omega_P))


@dataclass(frozen=True)
class RadialProblem:
    """Grid and sector selection for one radial eigenproblem.

    R = None defers to default_outer_radius(config).  The sign convention
    s is a build-time constant (see core.SIGN_CONVENTION); it is exposed
    here only so oracle tests can probe both orientations.
    """

    m: int
    model: str = FLUX_LINE
    R: float = None
    N: int = 4000
    s: int = SIGN_CONVENTION
    assembly: str = EXPANDED

    def __post_init__(self):
        if self.model not in _MODELS:
            raise ValueError(f"unknown radial model {self.model!r}")
        if int(self.m) != self.m:
            raise ValueError("sector label m must be an integer")
        object.__setattr__(self, "m", int(self.m))
        if self.N < 200:
            raise ValueError(f"N = {self.N}: at least 200 grid points required")
        if self.s not in (-1, 1):
            raise ValueError("sign convention s must be +1 or -1")
        if self.assembly not in (EXPANDED, POTENTIAL):
            raise ValueError(f"unknown assembly order {self.assembly!r}")
        if self.R is not None and not self.R > 0:
            raise ValueError("outer radius must be positive")


def _centrifugal_weight(j, nu, mu, h):
    # Discrete replacement for (nu^2 - 1/4)/(2 mu rho^2): chosen so the
    # full stencil annihilates rho^(nu + 1/2) exactly.  The pointwise value
    # loses the second-order convergence rate for nu < 1/2; this keeps it.
    sig = nu + 0.5
    jf = j.astype(float)
    num = (jf + 1.0) ** sig - 2.0 * jf ** sig + (jf - 1.0) ** sig
    return num / (2.0 * mu * h * h * jf ** sig)


def _assemble(config, problem, R, N):
    """Grid, diagonal, off-diagonal and spacing for one resolution."""
    mu = config.mu
    wc = config.omega_c
    wP = config.omega_P
    alpha = config.alpha
    s = float(problem.s)
    m = float(problem.m)
    j = np.arange(1, N + 1)
    wall = problem.model == FINITE_SOLENOID and config.a > 0.0
    if wall:
        h = (R - config.a) / (N + 1)
        rho = config.a + j * h
        rho2 = rho * rho
        if problem.assembly == POTENTIAL:
            beta = 0.5 * mu * wc * rho2 + alpha
            pot = ((m + s * beta) ** 2 - 0.25) / (2.0 * mu * rho2) \
                + 0.5 * mu * wP * wP * rho2
        else:
            mp = m + s * alpha
            wt2 = wP * wP + 0.25 * wc * wc
            pot = (mp * mp - 0.25) / (2.0 * mu * rho2) \
                + 0.5 * s * mp * wc + 0.5 * mu * wt2 * rho2
    else:
        # flux line (or a solenoid shrunk to a = 0): grid from the origin,
        # u(0) = 0 imposed by construction
        h = R / (N + 1)
        rho = j * h
        rho2 = rho * rho
        mp = m + s * alpha
        W = _centrifugal_weight(j, abs(mp), mu, h)
        if problem.assembly == POTENTIAL:
            beta = 0.5 * mu * wc * rho2 + alpha
            # singular rho^-2 piece lives in the discrete weight; the
            # remainder of the square is regular and evaluated as written
            rest = ((m + s * beta) ** 2 - mp * mp) / (2.0 * mu * rho2)
            pot = W + rest + 0.5 * mu * wP * wP * rho2
        else:
            wt2 = wP * wP + 0.25 * wc * wc
            pot = W + 0.5 * s * mp * wc + 0.5 * mu * wt2 * rho2
    diag = 1.0 / (mu * h * h) + pot
    off = np.full(N - 1, -0.5 / (mu * h * h))
    return rho, diag, off, h


@dataclass(frozen=True)
class RadialOperator:
    """Discretized sector Hamiltonian, rebuildable at any resolution."""

    config: TrapConfig
    problem: RadialProblem
    R: float

    def arrays(self, N=None):
        """(rho, diag, offdiag, h) at N points (problem.N when omitted)."""
        return _assemble(self.config, self.problem, self.R,
                         self.problem.N if N is None else N)


def build_radial_hamiltonian(config, problem):
    if not isinstance(problem, RadialProblem):
        raise TypeError("problem must be a RadialProblem")
    R = default_outer_radius(config) if problem.R is None else float(problem.R)
    if problem.model == FINITE_SOLENOID and R <= config.a:
        raise ValueError(
            f"outer radius R = {R} does not clear the wall at a = {config.a}")
    return RadialOperator(config=config, problem=problem, R=R)


@dataclass
class SpectralResult:
    """Lowest part of one sector tower plus quadrature observables.

    energies are Richardson-refined; vectors live on the fine grid with
    sum(u^2) h = 1 and the largest-amplitude component positive.
    """

    m: int
    model: str
    s: int
    R: float
    N: int
    energies: np.ndarray
    vectors: np.ndarray   # shape (k, fine grid)
    rho: np.ndarray
    h: float
    rho2: np.ndarray
    Ek: np.ndarray

    def __len__(self):
        return self.energies.size


def eigensolve(operator, k):
    """Lowest k states of the sector.

    Eigenvalues from the N and 2N+1 grids are Richardson-combined to
    cancel the leading h^2 discretization error; eigenvectors and
    observables come from the fine grid.  Ordering is ascending by
    contract, and repeated calls are bit-identical.
    """
    if k < 1:
        raise ValueError("need at least one state")
    prob = operator.problem
    Nc = prob.N
    Nf = 2 * Nc + 1   # halves the spacing exactly
    if k > Nc:
        raise ValueError(f"k = {k} exceeds the coarse grid size {Nc}")
    _, dc, ec, _ = operator.arrays(Nc)
    rho, df, ef, h = operator.arrays(Nf)
    try:
        coarse = eigh_tridiagonal(dc, ec, select="i",
                                  select_range=(0, k - 1), eigvals_only=True)
        fine, vecs = eigh_tridiagonal(df, ef, select="i",
                                      select_range=(0, k - 1))
    except LinAlgError as exc:
        raise ConvergenceFailure(
            f"eigensolver failed in sector m = {prob.m}: {exc}") from None
    energies = (4.0 * fine - coarse) / 3.0
    order = np.argsort(energies, kind="stable")
    energies = energies[order]
    u = vecs[:, order].T / np.sqrt(h)
    for i in range(k):
        lead = int(np.argmax(np.abs(u[i])))
        if u[i, lead] < 0.0:
            u[i] = -u[i]
    peak = np.max(np.abs(u), axis=1)
    tail = np.max(np.abs(u[:, -5:]), axis=1)
    bad = np.nonzero(tail > _TAIL_RTOL * peak)[0]
    if bad.size:
        n0 = int(bad[0])
        raise GridTooSmall(
            f"sector m = {prob.m}, state n = {n0}: amplitude {tail[n0]:.2e} "
            f"at R = {operator.R:g} (peak {peak[n0]:.2e}); enlarge R")
    w = u * u * h
    rho2 = w @ (rho * rho)
    Ek = energies - 0.5 * operator.config.mu * operator.config.omega_P ** 2 * rho2
    low = np.nonzero(Ek < -1e-9)[0]
    if low.size:
        n0 = int(low[0])
        raise NumericalFailure(
            f"sector m = {prob.m}, state n = {n0}: mechanical kinetic "
            f"energy {Ek[n0]:.3e} below tolerance")
    return SpectralResult(m=prob.m, model=prob.model, s=prob.s,
                          R=operator.R, N=Nc, energies=energies, vectors=u,
                          rho=rho, h=h, rho2=rho2, Ek=Ek)


@dataclass(frozen=True)
class ResidualReport:
    """Angular-momentum identity residuals for one solved sector."""

    m: int
    r: np.ndarray
    bound: np.ndarray
    ok: np.ndarray

    @property
    def all_ok(self):
        return bool(np.all(self.ok))


def residual_identity(result, config, m=None):
    """Residual of the exact J_z decomposition, state by state.

    J_z splits identically into the mechanical angular term plus
    mu*omega_c*rho^2/2 plus alpha, so the mechanical expectation follows
    from the sector label and <rho^2> alone:

        r = m + s*(alpha + mu*omega_c*<rho^2>/2)

    and Cauchy-Schwarz bounds it by 2*sqrt(2 mu <E_k> <rho^2>).
    """
    if m is None:
        m = result.m
    r = m + result.s * (config.alpha
                        + 0.5 * config.mu * config.omega_c * result.rho2)
    bound = 2.0 * np.sqrt(2.0 * config.mu * np.maximum(result.Ek, 0.0)
                          * result.rho2)
    ok = np.abs(r) <= bound + 1e-12
    return ResidualReport(m=int(m), r=r, bound=bound, ok=ok)


def residual_scan(config, ratios, sector=0, k=1, N=4000, R=None):
    """Ground-state residual along an omega_c sweep.

    omega_P, mu and alpha are held fixed while omega_c = ratio*omega_P
    varies; flux-line model.  Returns one record per ratio plus a flag
    for the monotone decrease of the signed residual.
    """
    records = []
    for ratio in ratios:
        if ratio <= 0:
            raise ValueError("ratios must be positive")
        cfg = TrapConfig.from_flux(omega_P=config.omega_P, alpha=config.alpha,
                                   mu=config.mu,
                                   omega_c=ratio * config.omega_P,
                                   a=config.a if config.a > 0 else 1.0)
        prob = RadialProblem(m=sector, model=FLUX_LINE, R=R, N=N)
        res = eigensolve(build_radial_hamiltonian(cfg, prob), k)
        rep = residual_identity(res, cfg)
        records.append({
            "ratio": float(ratio),
            "m": sector,
            "E": float(res.energies[0]),
            "rho2": float(res.rho2[0]),
            "Ek": float(res.Ek[0]),
            "residual": float(rep.r[0]),
            "bound": float(rep.bound[0]),
            "ok": bool(rep.ok[0]),
        })
    rs = [rec["residual"] for rec in records]
    monotone = all(b < a for a, b in zip(rs, rs[1:]))
    return {"records": records, "monotone_decreasing": monotone,
            "all_within_bound": all(rec["ok"] for rec in records)}


@dataclass(frozen=True)
class SlowBranchReport:
    omega_minus: float
    omega_star: float
    relative_gap: float
    limit: float
    ok: bool
    gaps: tuple


def slow_branch_check(config, sectors=(1, 2, 3, 4), N=4000, R=None):
    """Reduced-model frequency against exact slow-tower gaps.

    Solves the ground state of consecutive sectors on the slow branch and
    reads omega_minus off the spacings.  Sectors start at m = 1 so a
    fractional flux cannot fold the tower through m' = 0.
    """
    if config.omega_c < 10.0 * config.omega_P:
        raise ValueError("slow branch requires omega_c/omega_P >= 10")
    sectors = list(sectors)
    if sorted(sectors) != sectors or len(set(sectors)) != len(sectors):
        raise ValueError("sectors must be strictly increasing")
    energies = []
    for m in sectors:
        prob = RadialProblem(m=m, model=FLUX_LINE, R=R, N=N)
        res = eigensolve(build_radial_hamiltonian(config, prob), 1)
        energies.append(res.energies[0])
    gaps = np.diff(energies)
    if np.any(gaps <= 0.0):
        raise TowerIdentificationError(
            "slow-tower energies not ascending across sectors "
            f"{sectors}: gaps {gaps.tolist()}")
    mean = float(np.mean(gaps))
    spread = float(np.max(np.abs(gaps - mean))) / mean
    if spread > 1e-3:
        raise TowerIdentificationError(
            f"slow-tower spacings inconsistent: relative spread {spread:.2e}")
    omega_star = config.omega_star()
    rel = abs(omega_star - mean) / mean
    limit = 2.0 * (config.omega_P / config.omega_c) ** 2
    return SlowBranchReport(omega_minus=mean, omega_star=omega_star,
                            relative_gap=rel, limit=limit, ok=rel <= limit,
                            gaps=tuple(float(g) for g in gaps))


def axial_spectrum(config, n):
    """Energy of the n-th axial level, omega_z = 2*omega_P."""
    if n < 0 or int(n) != n:
        raise ValueError("n must be a non-negative integer")
    return 2.0 * config.omega_P * (n + 0.5)


def solve_sectors(config, sectors, k=6, threads=None, model=FLUX_LINE,
                  R=None, N=4000, s=SIGN_CONVENTION, assembly=EXPANDED):
    """Independent sector solves, merged deterministically.

    threads > 1 maps sectors over a thread pool (the tridiagonal solver
    releases the GIL); output is keyed by m and identical regardless of
    worker count.
    """
    sectors = list(sectors)
    if len(set(sectors)) != len(sectors):
        raise ValueError("duplicate sector labels")

    def one(m):
        prob = RadialProblem(m=m, model=model, R=R, N=N, s=s,
                             assembly=assembly)
        return eigensolve(build_radial_hamiltonian(config, prob), k)

    if threads is None or threads <= 1:
        results = [one(m) for m in sectors]
    else:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            results = list(pool.map(one, sectors))
    return dict(zip(sectors, results))


def sector_records(config, results):
    """Flat per-state records in (m, n) order, ready for serialization."""
    records = []
    for m in sorted(results):
        res = results[m]
        rep = residual_identity(res, config)
        for n in range(len(res)):
            records.append({
                "m": int(m),
                "n": int(n),
                "E": float(res.energies[n]),
                "rho2": float(res.rho2[n]),
                "Ek": float(res.Ek[n]),
                "residual": float(rep.r[n]),
                "bound": float(rep.bound[n]),
                "model": res.model,
            })
    return records
