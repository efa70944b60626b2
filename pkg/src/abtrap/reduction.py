"""Constraint classification, Dirac brackets, and the reduced quantum model.

The vanishing-kinetic-energy limit of the trap turns the momenta into
constraints phi_i = 0.  When their mutual Poisson-bracket matrix is
invertible (second class), the Dirac bracket reduces the phase space to the
coordinate plane and the remaining quadratic Hamiltonian quantizes to a
one-dimensional oscillator whose ladder also grades the canonical angular
momentum.  A degenerate bracket matrix is a first-class result here, reported
as ReductionImpossible, never a crash.

Everything in this module is exact symbolic algebra; numeric values only
appear at the very end when a TrapConfig is supplied.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache

from .algebra import (
    PhaseSpace,
    RationalPhaseFunction,
    evaluate,
    expression_sign,
    poisson_bracket,
    serialize_expression,
    substitute,
)
from .core import TrapConfig
from .errors import ReductionImpossible, ShapeMismatch, SignUndecidableError

PHASE_BASIS = ("x1", "x2", "p1", "p2")
INDEPENDENT_VARIABLES = ("x1", "x2")


class Classification(Enum):
    SECOND_CLASS = "second_class"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class ConstraintSet:
    """Ordered constraints with a provenance label naming the trap limit."""

    constraints: tuple
    provenance: str = ""

    def __post_init__(self):
        cons = tuple(self.constraints)
        if not cons:
            raise ValueError("a constraint set needs at least one constraint")
        for c in cons:
            if not isinstance(c, RationalPhaseFunction):
                raise TypeError("constraints must be RationalPhaseFunction values")
        if len({c.expr for c in cons}) != len(cons):
            raise ValueError("constraints are not distinct after normalization")
        object.__setattr__(self, "constraints", cons)

    @property
    def space(self):
        return self.constraints[0].space

    def __len__(self):
        return len(self.constraints)

    def __iter__(self):
        return iter(self.constraints)


# -- builders for the trap families --------------------------------------------


def flux_term(space):
    """Dimensionless flux alpha = mu*omega_0*a^2/2 as an expression."""
    mu, w0, a = space.vars("mu", "omega_0", "a")
    return mu * w0 * a * a / 2


def trap_constraints(space=None, cyclotron=True, flux=True):
    """phi_i = 0 from the vanishing-kinetic-energy limit.

    cyclotron and flux toggle the two vector-potential contributions,
    producing the full family, its omega_0 = 0 member (pure combined trap),
    and its omega_c = 0 member (flux only, degenerate).
    """
    if space is None:
        space = PhaseSpace()
    x1, x2, p1, p2 = space.vars(*PHASE_BASIS)
    mu, wc = space.vars("mu", "omega_c")
    rho2 = x1 * x1 + x2 * x2
    g1 = space.zero
    g2 = space.zero
    labels = []
    if cyclotron:
        g1 = g1 + mu * wc * x2 / 2
        g2 = g2 - mu * wc * x1 / 2
        labels.append("uniform field")
    if flux:
        alpha = flux_term(space)
        g1 = g1 + alpha * x2 / rho2
        g2 = g2 - alpha * x1 / rho2
        labels.append("flux line")
    provenance = "vanishing kinetic energy: " + (" + ".join(labels) if labels else "free")
    return ConstraintSet((p1 + g1, p2 + g2), provenance=provenance)


def perp_hamiltonian(space=None, cyclotron=True, flux=True):
    """Planar Hamiltonian: mechanical kinetic square plus the quadrupole well."""
    if space is None:
        space = PhaseSpace()
    phi1, phi2 = trap_constraints(space, cyclotron=cyclotron, flux=flux).constraints
    x1, x2 = space.vars("x1", "x2")
    mu, wP = space.vars("mu", "omega_P")
    rho2 = x1 * x1 + x2 * x2
    return (phi1 * phi1 + phi2 * phi2) / (2 * mu) + mu * wP * wP * rho2 / 2


def angular_momentum(space=None):
    """Canonical J_z = x1 p2 - x2 p1."""
    if space is None:
        space = PhaseSpace()
    x1, x2, p1, p2 = space.vars(*PHASE_BASIS)
    return x1 * p2 - x2 * p1


# -- constraint matrix -----------------------------------------------------------


def _det(entries):
    n = len(entries)
    if n == 1:
        return entries[0][0]
    if n == 2:
        return entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0]
    raise ShapeMismatch("at most 2 constraints are supported")


@dataclass(frozen=True)
class ConstraintMatrix:
    """C_ab = {phi_a, phi_b} with its symbolic classification."""

    constraint_set: ConstraintSet
    entries: tuple
    determinant: RationalPhaseFunction
    classification: Classification

    def entry_strings(self):
        return [[serialize_expression(e) for e in row] for row in self.entries]

    def at(self, config):
        """Numeric matrix and determinant at a TrapConfig point."""
        point = config_point(self.constraint_set.space, config)
        rows = [[float(evaluate(e, point)) if not e.is_zero else 0.0 for e in row]
                for row in self.entries]
        det = float(evaluate(self.determinant, point)) if not self.determinant.is_zero else 0.0
        return rows, det


def constraint_matrix(cs):
    """Fill C_ab and classify: second class iff det C is provably nonzero
    under the declared positivity flags; degenerate iff det C vanishes
    identically; anything in between is an error, not a guess."""
    cons = cs.constraints
    n = len(cons)
    if n > 2:
        raise ShapeMismatch("at most 2 constraints are supported")
    entries = tuple(tuple(poisson_bracket(a, b) for b in cons) for a in cons)
    det = _det(entries)
    if det.is_zero:
        classification = Classification.DEGENERATE
    else:
        sign = expression_sign(det)
        if sign is None:
            raise SignUndecidableError(
                "det C = " + serialize_expression(det)
                + " is not identically zero, but its sign does not follow from "
                "the declared positivity flags; refusing to classify")
        classification = Classification.SECOND_CLASS
    return ConstraintMatrix(cs, entries, det, classification)


def _require_second_class(cm):
    if cm.classification is not Classification.SECOND_CLASS:
        raise ReductionImpossible(
            "the constraint bracket matrix is degenerate (its determinant "
            "vanishes identically), so the bracket cannot be inverted and no "
            "reduced quantum dynamics exists in this limit; entries: "
            + str(cm.entry_strings()),
            matrix=cm)


def _inverse(cm):
    """Adjugate-over-determinant inverse of the (small) constraint matrix."""
    e = cm.entries
    det = cm.determinant
    if len(e) == 1:
        return ((1 / det,),)
    return ((e[1][1] / det, -e[0][1] / det),
            (-e[1][0] / det, e[0][0] / det))


# -- constraint surface -----------------------------------------------------------


def surface_bindings(cs):
    """Solve phi_a = 0 for the momenta.

    Requires the constraints to be linear in (p1, p2) with parameter-only
    coefficients; this covers every vanishing-kinetic-energy family.  Returns
    the substitution map imposing the constraints as strong conditions.
    """
    space = cs.space
    if len(cs) != 2:
        raise ShapeMismatch("momentum solve needs exactly 2 constraints")
    p_names = ("p1", "p2")
    rows = []
    rhs = []
    for phi in cs:
        coeffs = [phi.diff(p) for p in p_names]
        for c in coeffs:
            if not c.is_parameter_only():
                raise ShapeMismatch("constraints are not linear in the momenta")
        residual = phi
        for c, p in zip(coeffs, p_names):
            residual = residual - c * space.var(p)
        if residual.free_names() & set(p_names):
            raise ShapeMismatch("constraints are not linear in the momenta")
        rows.append(coeffs)
        rhs.append(-residual)
    det = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    if det.is_zero:
        raise ShapeMismatch("constraints do not determine the momenta")
    sol_p1 = (rhs[0] * rows[1][1] - rhs[1] * rows[0][1]) / det
    sol_p2 = (rows[0][0] * rhs[1] - rows[1][0] * rhs[0]) / det
    return {"p1": sol_p1, "p2": sol_p2}


# -- Dirac bracket -----------------------------------------------------------------


@lru_cache(maxsize=128)
def _matrix_and_inverse(cs):
    cm = constraint_matrix(cs)
    inv = _inverse(cm) if cm.classification is Classification.SECOND_CLASS else None
    return cm, inv


@lru_cache(maxsize=128)
def _surface_bindings_cached(cs):
    items = tuple(sorted(surface_bindings(cs).items()))
    return items


def dirac_bracket(f, g, cs, on_surface=True):
    """{f,g}_D = {f,g} - {f,phi_a} (C^-1)_ab {phi_b,g}.

    With on_surface (the default) the result is reduced on the constraint
    surface, where the constraints hold strongly.
    """
    cm, inv = _matrix_and_inverse(cs)
    _require_second_class(cm)
    cons = cs.constraints
    result = poisson_bracket(f, g)
    for a_i, phi_a in enumerate(cons):
        fa = poisson_bracket(f, phi_a)
        if fa.is_zero:
            continue
        for b_i, phi_b in enumerate(cons):
            inv_ab = inv[a_i][b_i]
            if inv_ab.is_zero:
                continue
            result = result - fa * inv_ab * poisson_bracket(phi_b, g)
    if on_surface and not result.is_zero:
        result = substitute(result, dict(_surface_bindings_cached(cs)))
    return result


@dataclass(frozen=True)
class DiracStructure:
    """Dirac-bracket table over the phase-space basis.

    Construction verifies the strong conditions {phi_a, e}_D = 0 for every
    basis observable and the antisymmetry of the table.
    """

    constraint_set: ConstraintSet
    matrix: ConstraintMatrix
    table: dict
    independent_variables: tuple = INDEPENDENT_VARIABLES

    def __getitem__(self, pair):
        return self.table[pair]

    def table_strings(self):
        return {f"{{{a},{b}}}": serialize_expression(v) for (a, b), v in self.table.items()}


def dirac_structure(cs):
    space = cs.space
    cm = constraint_matrix(cs)
    _require_second_class(cm)
    basis = {name: space.var(name) for name in PHASE_BASIS}
    table = {}
    for na, fa in basis.items():
        for nb, fb in basis.items():
            table[(na, nb)] = dirac_bracket(fa, fb, cs)
    for na in PHASE_BASIS:
        for nb in PHASE_BASIS:
            if not (table[(na, nb)] + table[(nb, na)]).is_zero:
                raise ShapeMismatch("Dirac table lost antisymmetry")
    for phi in cs:
        for name, e in basis.items():
            if not dirac_bracket(phi, e, cs).is_zero:
                raise ShapeMismatch(
                    f"strong condition violated: {{phi, {name}}}_D != 0")
    return DiracStructure(cs, cm, table)


# -- reduction to the oscillator model ----------------------------------------------


def config_point(space, config):
    """Exact parameter bindings for a TrapConfig (floats taken bit-exactly)."""
    values = {
        "mu": Fraction(config.mu),
        "omega_c": Fraction(config.omega_c),
        "omega_0": Fraction(config.omega_0),
        "omega_P": Fraction(config.omega_P),
        "a": Fraction(config.a),
    }
    return {k: v for k, v in values.items() if k in space.parameters}


@dataclass(frozen=True)
class ReducedModel:
    """Reduced canonical data of the second-class surface.

    canonical_pair = (x, p) with {x, p}_D = 1 exactly; the reduced
    Hamiltonian is p^2/(2 mu*) + mu* omega*^2 x^2 / 2, which as a surface
    expression equals potential_coefficient * rho^2 / 2.
    """

    constraint_set: ConstraintSet
    matrix: ConstraintMatrix
    canonical_pair: tuple
    gamma: RationalPhaseFunction
    effective_mass: RationalPhaseFunction
    effective_frequency: RationalPhaseFunction
    reduced_hamiltonian: RationalPhaseFunction
    flux: RationalPhaseFunction
    potential_coefficient: RationalPhaseFunction
    config: TrapConfig = None

    def value(self, expr):
        """Float value of a parameter-only expression at the stored config."""
        if self.config is None:
            raise ValueError("no TrapConfig attached to this model")
        return float(evaluate(expr, config_point(self.constraint_set.space, self.config)))

    def effective_mass_value(self):
        return self.value(self.effective_mass)

    def effective_frequency_value(self):
        return self.value(self.effective_frequency)

    def flux_value(self):
        return self.value(self.flux)


def reduce(hamiltonian, cs, config=None):
    """Restrict the dynamics to the second-class constraint surface.

    Verifies that the surface Hamiltonian is an isotropic quadratic, chooses
    the canonical pair (x1, x2/gamma) with gamma = {x1, x2}_D, and assembles
    the effective oscillator data.  The dimensionless flux is read off the
    phase-independent part of the canonical angular momentum on the surface,
    and the ladder identity (J_z - flux) * omega* = H_surface is checked
    exactly before any spectrum statement is made.
    """
    space = cs.space
    cm = constraint_matrix(cs)
    _require_second_class(cm)
    if config is not None:
        _, det_value = cm.at(config)
        if det_value == 0.0:
            raise ReductionImpossible(
                "the constraint matrix is degenerate at the supplied parameter "
                "values; no reduced dynamics exists there", matrix=cm)

    bindings = surface_bindings(cs)
    h_surface = substitute(hamiltonian, bindings)

    x1, x2 = space.vars("x1", "x2")
    rho2 = x1 * x1 + x2 * x2
    k = h_surface / (rho2 / 2)
    if not k.is_parameter_only():
        raise ShapeMismatch(
            "surface Hamiltonian is not an isotropic quadratic in (x1, x2): "
            + serialize_expression(h_surface))
    k_sign = expression_sign(k)
    if k_sign is None:
        raise SignUndecidableError(
            "sign of the surface potential coefficient "
            + serialize_expression(k) + " is undecidable from positivity flags")
    if k_sign <= 0:
        raise ShapeMismatch("surface Hamiltonian is not confining")

    gamma = dirac_bracket(x1, x2, cs)
    if not gamma.is_parameter_only():
        raise ShapeMismatch("{x1, x2}_D is not phase-independent; the surface "
                            "does not carry a constant symplectic structure")
    g_sign = expression_sign(gamma)
    if g_sign is None:
        raise SignUndecidableError(
            "sign of {x1, x2}_D = " + serialize_expression(gamma)
            + " is undecidable from positivity flags")
    abs_gamma = gamma if g_sign > 0 else -gamma

    # p = x2/gamma makes {x, p}_D = +1 exact
    p_reduced = x2 / gamma
    pair_bracket = dirac_bracket(x1, p_reduced, cs)
    if pair_bracket != 1:
        raise ShapeMismatch("canonical pair failed {x, p}_D = 1: got "
                            + serialize_expression(pair_bracket))

    # H = k rho^2/2 = p^2/(2 mu*) + mu* omega*^2 x^2/2 under x2 = gamma p
    mu_star = 1 / (k * gamma * gamma)
    omega_star = k * abs_gamma

    jz_surface = substitute(angular_momentum(space), bindings)
    try:
        flux = substitute(jz_surface, {"x1": 0, "x2": 0})
    except Exception as exc:
        raise ShapeMismatch("cannot extract the flux part of J_z on the "
                            "surface: " + str(exc)) from exc
    if not flux.is_parameter_only():
        raise ShapeMismatch("flux part of J_z is not phase-independent")
    if not ((jz_surface - flux) * omega_star - h_surface).is_zero:
        raise ShapeMismatch(
            "J_z on the surface does not split as flux + H/omega*; the "
            "oscillator ladder does not grade the angular momentum")

    return ReducedModel(
        constraint_set=cs,
        matrix=cm,
        canonical_pair=(x1, p_reduced),
        gamma=gamma,
        effective_mass=mu_star,
        effective_frequency=omega_star,
        reduced_hamiltonian=h_surface,
        flux=flux,
        potential_coefficient=k,
        config=config,
    )


# -- quantization -------------------------------------------------------------------


@dataclass(frozen=True)
class ReducedSpectrum:
    """Oscillator spectrum of the reduced model (hbar = 1).

    energy(n) = omega* (n + 1/2); canonical J_z eigenvalues are
    flux + n + 1/2, so the zero point is flux + 1/2 and the flux-induced
    (state-independent) part is J_AB = flux.
    """

    model: ReducedModel

    def energy(self, n):
        if n < 0:
            raise ValueError("n must be a non-negative integer")
        return self.model.effective_frequency * (Fraction(2 * n + 1, 2))

    def canonical_Jz(self, n):
        if n < 0:
            raise ValueError("n must be a non-negative integer")
        return self.model.flux + Fraction(2 * n + 1, 2)

    @property
    def zero_point_Jz(self):
        return self.canonical_Jz(0)

    @property
    def J_AB(self):
        return self.model.flux

    def energy_value(self, n):
        return self.model.value(self.energy(n))

    def canonical_Jz_value(self, n):
        return self.model.value(self.canonical_Jz(n))

    def formulas(self):
        """Serialized spectrum formulas for reports."""
        omega = serialize_expression(self.model.effective_frequency)
        flux = serialize_expression(self.model.flux)
        return {
            "energy": f"({omega})*(n + 1/2)",
            "canonical_Jz": f"({flux}) + n + 1/2",
            "zero_point_Jz": serialize_expression(self.zero_point_Jz),
            "J_AB": flux,
        }


def quantize(model):
    """Spectrum of the reduced oscillator; the ladder identity was verified
    during reduce(), so this is pure packaging."""
    return ReducedSpectrum(model)


# -- Legendre / Lagrangian limit check ------------------------------------------------


@dataclass(frozen=True)
class LegendreReport:
    passed: bool
    difference: RationalPhaseFunction
    momenta_match: bool
    h0_prime: RationalPhaseFunction
    expected: RationalPhaseFunction

    def as_dict(self):
        return {
            "passed": self.passed,
            "difference": serialize_expression(self.difference),
            "momenta_match": self.momenta_match,
            "h0_prime": serialize_expression(self.h0_prime),
            "expected": serialize_expression(self.expected),
        }


def legendre_check(config=None, perturbation=None, cyclotron=True, flux=True):
    """Verify the massless-limit Lagrangian route.

    Builds L0 (velocity-linear coupling to the vector potential plus the
    quadrupole well), computes p_0i = dL0/dv_i, forms H0' = p_0i v_i - L0,
    and checks that H0' equals mu omega_P^2 rho^2 / 2 and that the momenta
    reproduce the constraints.  perturbation, an expression in (x1, x2) or
    source text for one, is added to L0 to exercise the detector.

    A config only selects the family: alpha = 0 drops the flux term.
    """
    if config is not None and config.alpha == 0:
        flux = False
    if config is not None and config.omega_c == 0:
        cyclotron = False
    space = PhaseSpace(aux=("v1", "v2"))
    x1, x2, v1, v2 = space.vars("x1", "x2", "v1", "v2")
    mu, wc, wP = space.vars("mu", "omega_c", "omega_P")
    rho2 = x1 * x1 + x2 * x2

    a1 = space.zero
    a2 = space.zero
    if cyclotron:
        a1 = a1 - mu * wc * x2 / 2
        a2 = a2 + mu * wc * x1 / 2
    if flux:
        alpha = flux_term(space)
        a1 = a1 - alpha * x2 / rho2
        a2 = a2 + alpha * x1 / rho2

    lagrangian = v1 * a1 + v2 * a2 - mu * wP * wP * rho2 / 2
    if perturbation is not None:
        if isinstance(perturbation, str):
            perturbation = space.parse(perturbation)
        lagrangian = lagrangian + perturbation

    p0 = (lagrangian.diff("v1"), lagrangian.diff("v2"))
    h0_prime = p0[0] * v1 + p0[1] * v2 - lagrangian
    expected = mu * wP * wP * rho2 / 2
    difference = expected - h0_prime

    phi1, phi2 = trap_constraints(space, cyclotron=cyclotron, flux=flux).constraints
    momenta_match = (substitute(phi1, {"p1": p0[0]}).is_zero
                     and substitute(phi2, {"p2": p0[1]}).is_zero)

    return LegendreReport(
        passed=difference.is_zero and momenta_match,
        difference=difference,
        momenta_match=momenta_match,
        h0_prime=h0_prime,
        expected=expected,
    )


# -- reporting ---------------------------------------------------------------------


def reduction_report(model, spectrum=None):
    """JSON-ready document: matrix, classification, Dirac table, reduced data."""
    if spectrum is None:
        spectrum = quantize(model)
    structure = dirac_structure(model.constraint_set)
    cm = model.matrix
    doc = {
        "provenance": model.constraint_set.provenance,
        "constraint_matrix": {
            "entries": cm.entry_strings(),
            "determinant": serialize_expression(cm.determinant),
            "classification": cm.classification.value,
        },
        "dirac_table": structure.table_strings(),
        "independent_variables": list(structure.independent_variables),
        "reduced_model": {
            "canonical_pair": [serialize_expression(e) for e in model.canonical_pair],
            "gamma": serialize_expression(model.gamma),
            "mu_star": serialize_expression(model.effective_mass),
            "omega_star": serialize_expression(model.effective_frequency),
            "alpha": serialize_expression(model.flux),
            "reduced_hamiltonian": serialize_expression(model.reduced_hamiltonian),
        },
        "spectrum": spectrum.formulas(),
    }
    if model.config is not None:
        doc["values"] = {
            "mu_star": model.effective_mass_value(),
            "omega_star": model.effective_frequency_value(),
            "alpha": model.flux_value(),
            "zero_point_Jz": model.value(spectrum.zero_point_Jz),
            "J_AB": model.value(spectrum.J_AB),
        }
    return doc
