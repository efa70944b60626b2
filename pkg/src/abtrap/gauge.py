"""Vector potentials, the singular gauge map, and its verification.

Everything is expressed in the folded natural units of the rest of the
package: the charge and light-speed factors are absorbed into the
frequencies, so the azimuthal potential reads

    A(rho > a) = (mu*omega_c*rho/2 + alpha/rho) phi_hat

with the solenoid part alpha/rho exactly the piece that a singular gauge
function chi = -alpha*atan2(x2, x1) removes.
"""

import math
import random
from dataclasses import dataclass

import numpy as np

from .algebra import PhaseSpace, parse_expression, serialize_expression, substitute
from .core import TrapConfig
from .errors import ReductionImpossible
from .reduction import (
    angular_momentum,
    constraint_matrix,
    flux_term,
    surface_bindings,
    trap_constraints,
)
from .spectral import (
    EXPANDED,
    FLUX_LINE,
    POTENTIAL,
    RadialProblem,
    build_radial_hamiltonian,
    eigensolve,
)

INSIDE = "inside"
OUTSIDE = "outside"
CONFINING = "confining"
_REGIONS = (INSIDE, OUTSIDE, CONFINING)


@dataclass(frozen=True)
class VectorPotentialField:
    """One of the three azimuthal potentials of the trap."""

    region: str
    config: TrapConfig

    def __post_init__(self):
        if self.region not in _REGIONS:
            raise ValueError(f"unknown region {self.region!r}")

    def __call__(self, x1, x2):
        c = self.config
        if self.region == INSIDE:
            w = 0.5 * c.mu * c.omega_0
            return -w * x2, w * x1
        if self.region == CONFINING:
            w = 0.5 * c.mu * c.omega_c
            return -w * x2, w * x1
        rho2 = x1 * x1 + x2 * x2
        if rho2 == 0.0:
            raise ValueError("outside potential is singular at the origin")
        return -c.alpha * x2 / rho2, c.alpha * x1 / rho2


def chi(config, x1, x2):
    """Gauge function removing the exterior solenoid potential.

    Branch cut along the negative x1 axis (atan2 convention); only defined
    up to 2*pi*alpha jumps across the cut.
    """
    return -config.alpha * math.atan2(x2, x1)


def grad_chi(config, x1, x2):
    """Analytic gradient of chi; equals -A_outside wherever rho > 0."""
    rho2 = x1 * x1 + x2 * x2
    if rho2 == 0.0:
        raise ValueError("grad chi undefined at the origin")
    return config.alpha * x2 / rho2, -config.alpha * x1 / rho2


def _length_scale(config):
    return 1.0 / math.sqrt(config.mu * config.omega_P)


def sample_annulus(config, n=64, margin=1e-3, seed=7):
    """Deterministic exterior sample points keeping clear of the cut.

    Radii span [1.05a, 10a] for a finite solenoid and a trap-length decade
    for the a = 0 idealization.
    """
    rng = random.Random(seed)
    if config.a > 0.0:
        lo, hi = 1.05 * config.a, 10.0 * config.a
    else:
        scale = _length_scale(config)
        lo, hi = scale, 10.0 * scale
    points = []
    for _ in range(n):
        rho = lo + (hi - lo) * rng.random()
        theta = (-math.pi + margin) + 2.0 * (math.pi - margin) * rng.random()
        points.append((rho * math.cos(theta), rho * math.sin(theta)))
    return points


@dataclass(frozen=True)
class PureGaugeReport:
    max_residual: float
    max_curl: float
    n_points: int

    @property
    def ok(self):
        return self.max_residual <= 1e-12 and self.max_curl <= 1e-12


def check_pure_gauge(config, points=None, margin=1e-3, seed=7):
    """Verify A_outside + grad(chi) = 0 and curl(A_outside) = 0 pointwise.

    The gradient is analytic so the cancellation is exact up to rounding;
    the curl uses a fourth-order stencil with a step proportional to rho.
    Points at rho <= a or inside the cut margin are rejected.
    """
    if points is None:
        points = sample_annulus(config, margin=margin, seed=seed)
    field = VectorPotentialField(OUTSIDE, config)
    max_res = 0.0
    max_curl = 0.0
    for x1, x2 in points:
        rho = math.hypot(x1, x2)
        if rho <= config.a:
            raise ValueError(f"point ({x1}, {x2}) lies at rho <= a")
        if math.pi - abs(math.atan2(x2, x1)) < margin:
            raise ValueError(f"point ({x1}, {x2}) is within the cut margin")
        a1, a2 = field(x1, x2)
        g1, g2 = grad_chi(config, x1, x2)
        max_res = max(max_res, math.hypot(a1 + g1, a2 + g2))
        h = 1e-3 * rho
        # d A2/d x1 - d A1/d x2, five-point central differences
        d21 = (field(x1 - 2 * h, x2)[1] - 8.0 * field(x1 - h, x2)[1]
               + 8.0 * field(x1 + h, x2)[1] - field(x1 + 2 * h, x2)[1]) / (12.0 * h)
        d12 = (field(x1, x2 - 2 * h)[0] - 8.0 * field(x1, x2 - h)[0]
               + 8.0 * field(x1, x2 + h)[0] - field(x1, x2 + 2 * h)[0]) / (12.0 * h)
        max_curl = max(max_curl, abs(d21 - d12))
    return PureGaugeReport(max_residual=max_res, max_curl=max_curl,
                           n_points=len(points))


def circulation_over_2pi(config, radius=None, nodes=10000):
    """Loop integral of A_outside around a circle, divided by 2*pi.

    Equals the enclosed dimensionless flux alpha for any exterior radius.
    Trapezoid rule on the parametrized loop; the default radius is twice
    the solenoid radius (twice the trap length at a = 0).
    """
    if radius is None:
        radius = 2.0 * config.a if config.a > 0.0 else 2.0 * _length_scale(config)
    if radius <= config.a:
        raise ValueError("loop must stay outside the solenoid")
    field = VectorPotentialField(OUTSIDE, config)
    total = 0.0
    for j in range(nodes):
        theta = 2.0 * math.pi * j / nodes
        ct, st = math.cos(theta), math.sin(theta)
        a1, a2 = field(radius * ct, radius * st)
        total += (-a1 * st + a2 * ct) * radius
    # closed periodic loop: trapezoid = mean value times circumference
    return total / nodes


@dataclass(frozen=True)
class SpectrumEquivalenceReport:
    m: int
    gap: float
    flux_energies: tuple
    shifted_energies: tuple

    @property
    def ok(self):
        return self.gap <= 1e-10


def gauge_spectrum_equivalence(config, m, k=6, model=FLUX_LINE, N=4000, R=None):
    """Flux sector versus zero-flux operator at a shifted angular index.

    The gauge-transformed Hamiltonian acts on twisted-boundary functions,
    realized here through the continuous centrifugal index m + s*alpha.
    Both routes are assembled on the same grid through different float
    pipelines; their eigenvalues must agree to 1e-10 relative.  At
    alpha = 0 the transformation is the identity and the routes coincide
    by construction.
    """
    flux_prob = RadialProblem(m=m, model=model, N=N, R=R, assembly=POTENTIAL)
    shift_prob = RadialProblem(m=m, model=model, N=N, R=R, assembly=EXPANDED)
    if config.alpha == 0.0:
        res = eigensolve(build_radial_hamiltonian(config, shift_prob), k)
        e1 = e2 = res.energies
    else:
        e1 = eigensolve(build_radial_hamiltonian(config, flux_prob), k).energies
        e2 = eigensolve(build_radial_hamiltonian(config, shift_prob), k).energies
    gap = float(np.max(np.abs(e1 - e2) / np.maximum(np.abs(e1), 1e-300)))
    return SpectrumEquivalenceReport(m=m, gap=gap,
                                     flux_energies=tuple(map(float, e1)),
                                     shifted_energies=tuple(map(float, e2)))


@dataclass(frozen=True)
class JzGaugeReport:
    passed: bool
    transformed: str
    untransformed: str
    expected: str


def gauge_invariance_of_Jz(config=None):
    """Symbolic check that the flux term in J_z survives the gauge map.

    The transformed theory has no exterior potential, but the canonical
    momenta shift by grad(chi), so J_z' = x1 p2 - x2 p1 + alpha.  Imposing
    each theory's constraints as strong conditions must give the same
    function alpha + mu*omega_c*(x1^2 + x2^2)/2.  Exact rational
    arithmetic throughout; pass/fail cannot depend on the scale of a
    positive omega_c.
    """
    space = PhaseSpace()
    cs = trap_constraints(space)
    cs_transformed = trap_constraints(space, flux=False)
    if config is not None:
        rows, det = constraint_matrix(cs_transformed).at(config)
        if det == 0.0:
            raise ReductionImpossible(
                "constraint matrix is degenerate at this configuration "
                "(omega_c = 0): no bracket structure to compare",
                matrix=rows)
    alpha = flux_term(space)
    jz = angular_momentum(space)
    untransformed = substitute(jz, surface_bindings(cs))
    transformed = substitute(jz + alpha, surface_bindings(cs_transformed))
    expected = alpha + parse_expression(space, "mu*omega_c*(x1^2 + x2^2)/2")
    passed = (transformed - untransformed).is_zero \
        and (transformed - expected).is_zero
    return JzGaugeReport(passed=passed,
                         transformed=serialize_expression(transformed),
                         untransformed=serialize_expression(untransformed),
                         expected=serialize_expression(expected))


def gauge_block(config, m=0, k=6):
    """The four-quantity gauge summary attached to reports."""
    pure = check_pure_gauge(config)
    spectrum = gauge_spectrum_equivalence(config, m=m, k=k)
    symbolic = gauge_invariance_of_Jz(config)
    return {
        "max_pure_gauge_residual": pure.max_residual,
        "circulation_over_2pi": circulation_over_2pi(config),
        "spectrum_gap": spectrum.gap,
        "symbolic_pass": symbolic.passed,
    }
