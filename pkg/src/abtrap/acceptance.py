"""The acceptance gate: ten verifiable claims about this library.

Each criterion_* function checks one claim at its stated tolerance and
returns a CriterionResult; verify_all runs them all, assembles a
deterministic artifact tree (no timestamps, no runtimes in file content),
and checks its own byte-stability by generating the tree twice.

The parameter grids here are pinned: verify-all validates the library, not
the invoking configuration, whose canonicalized hash is only stamped into
the artifacts for provenance.

Criterion 1 contains a sign clause this implementation fails on purpose:
with every convention pinned down (bracket {x_i, p_j} = delta_ij, constraint
matrix C_12 = +mu*omega_c, constraints phi_i = p_i + g_i as built by
trap_constraints), the engine provably yields {x1, x2}_D = -1/(mu*omega_c),
not +1/(mu*omega_c).  The criterion is asserted as stated and reported
honestly; the physical content (canonical pair, spectrum, zero point) is
orientation-independent and covered by the other criteria.
"""

import math
import random
import time
from dataclasses import dataclass, field

import numpy as np

from . import reporting
from .algebra import PhaseSpace, parse_expression, serialize_expression
from .core import SIGN_CONVENTION, TrapConfig
from .errors import ReductionImpossible
from .gauge import check_pure_gauge, circulation_over_2pi, gauge_block, \
    gauge_invariance_of_Jz
from .reduction import Classification, constraint_matrix, dirac_bracket, \
    flux_term, legendre_check, perp_hamiltonian, quantize, reduce, \
    reduction_report, trap_constraints
from .secular import ClassicalState, PaulDrive, effective_potential_check, \
    extract_secular_frequency, integrate_trajectory
from .spectral import residual_scan, sector_records, slow_branch_check, \
    solve_sectors

# the trap family member most artifacts are evaluated at: alpha = 1/4
DEFAULT_TRAP = TrapConfig(omega_P=1.0, omega_c=1.0, omega_0=0.5, a=1.0)

_GRID = ((0.0, 0.0), (10.0, 0.0), (0.0, 0.25), (20.0, 0.25))
_GRID_SECTORS = (-2, -1, 0, 1, 2)
_GRID_STATES = 6


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    artifacts: dict = field(default_factory=dict)

    @property
    def line(self):
        verdict = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:>2} {verdict}  {self.name}: {self.detail}"


def _random_quadratic(space, rng):
    names = ("x1", "x2", "p1", "p2")
    gens = space.vars(*names)
    f = space.const(rng.randint(-9, 9))
    for g in gens:
        f = f + rng.randint(-9, 9) * g
    for i, gi in enumerate(gens):
        for gj in gens[i:]:
            f = f + rng.randint(-9, 9) * gi * gj
    return f


def criterion_1():
    """Dirac-bracket exactness: {x1,x2}_D = 1/(mu*omega_c), strong conditions."""
    space = PhaseSpace()
    cs = trap_constraints(space)
    x1, x2 = space.vars("x1", "x2")
    got = dirac_bracket(x1, x2, cs)
    required = parse_expression(space, "1/(mu*omega_c)")
    sign_ok = (got - required).is_zero
    rng = random.Random(20260816)
    held = 0
    for _ in range(50):
        f = _random_quadratic(space, rng)
        if all(dirac_bracket(phi, f, cs).is_zero for phi in cs):
            held += 1
    strong_ok = held == 50
    detail = (f"{{x1,x2}}_D = {serialize_expression(got)}, required exactly "
              f"1/(mu*omega_c) ({'match' if sign_ok else 'sign differs'}); "
              f"strong conditions hold for {held}/50 random quadratics")
    return CriterionResult(
        number=1, name="Dirac-bracket exactness",
        passed=sign_ok and strong_ok, detail=detail,
        artifacts={"dirac_bracket": serialize_expression(got),
                   "required": "1/(mu*omega_c)",
                   "sign_matches": sign_ok,
                   "strong_conditions_held": held})


def criterion_2():
    """Degeneracy dichotomy: omega_c = 0 degenerate, omega_0 = 0 reduces."""
    space = PhaseSpace()
    cs_flux_only = trap_constraints(space, cyclotron=False)
    cm0 = constraint_matrix(cs_flux_only)
    zero_matrix = all(e.is_zero for row in cm0.entries for e in row)
    degenerate = cm0.classification is Classification.DEGENERATE
    raised = False
    try:
        reduce(perp_hamiltonian(space, cyclotron=False), cs_flux_only)
    except ReductionImpossible:
        raised = True
    # numeric member of the full family at omega_c = 0
    raised_numeric = False
    try:
        reduce(perp_hamiltonian(space), trap_constraints(space),
               config=TrapConfig(omega_P=1.0, omega_c=0.0, omega_0=0.5, a=1.0))
    except ReductionImpossible:
        raised_numeric = True

    cs_no_flux = trap_constraints(space, flux=False)
    cs_full = trap_constraints(space)
    same_matrix = (constraint_matrix(cs_no_flux).entry_strings()
                   == constraint_matrix(cs_full).entry_strings())
    model = reduce(perp_hamiltonian(space, flux=False), cs_no_flux)
    zp = quantize(model).zero_point_Jz
    half_exact = (zp - space.const("1/2")).is_zero

    passed = (zero_matrix and degenerate and raised and raised_numeric
              and same_matrix and half_exact)
    detail = (f"omega_c=0: matrix identically zero = {zero_matrix}, "
              f"reduction refused = {raised and raised_numeric}; omega_0=0: "
              f"matrix unchanged = {same_matrix}, zero point exactly 1/2 = "
              f"{half_exact}")
    return CriterionResult(
        number=2, name="degeneracy dichotomy", passed=passed, detail=detail,
        artifacts={"flux_only_matrix": cm0.entry_strings(),
                   "flux_only_classification": cm0.classification.value,
                   "reduction_impossible_symbolic": raised,
                   "reduction_impossible_numeric": raised_numeric,
                   "no_flux_matrix_matches_full": same_matrix,
                   "no_flux_zero_point_is_half": half_exact})


def criterion_3():
    """Fractional zero point: hbar(alpha + 1/2) and J_AB = hbar*alpha."""
    space = PhaseSpace()
    model = reduce(perp_hamiltonian(space), trap_constraints(space))
    spectrum = quantize(model)
    alpha = flux_term(space)
    zp_ok = (spectrum.zero_point_Jz - (alpha + space.const("1/2"))).is_zero
    jab_ok = (spectrum.J_AB - alpha).is_zero
    # omega_c invariance: symbolically absent, and numerically stable
    wc_free = "omega_c" not in spectrum.zero_point_Jz.free_names()
    v1 = reduce(perp_hamiltonian(space), trap_constraints(space),
                config=DEFAULT_TRAP)
    v2_cfg = TrapConfig(omega_P=1.0, omega_c=7.0 / 3.0, omega_0=0.5, a=1.0)
    v2 = reduce(perp_hamiltonian(space), trap_constraints(space), config=v2_cfg)
    zp1 = v1.value(quantize(v1).zero_point_Jz)
    zp2 = v2.value(quantize(v2).zero_point_Jz)
    numeric_ok = zp1 == zp2 == 0.75
    passed = zp_ok and jab_ok and wc_free and numeric_ok
    detail = (f"zero point = alpha + 1/2 exactly: {zp_ok}; J_AB = alpha "
              f"exactly: {jab_ok}; omega_c-free: {wc_free}; value at "
              f"alpha = 1/4 under omega_c rescale: {zp1} == {zp2}")
    return CriterionResult(
        number=3, name="fractional zero point", passed=passed, detail=detail,
        artifacts={"zero_point_exact": zp_ok, "J_AB_exact": jab_ok,
                   "omega_c_free": wc_free, "zero_point_value": zp1})


def criterion_4():
    """Legendre route: H0' = mu*omega_P^2*rho^2/2 symbolically."""
    report = legendre_check()
    detail = (f"H0' - expected = {serialize_expression(report.difference)}; "
              f"momenta reproduce constraints: {report.momenta_match}")
    return CriterionResult(
        number=4, name="Legendre/limit equivalence", passed=report.passed,
        detail=detail, artifacts=report.as_dict())


def _closed_form(cfg, m, n):
    s = SIGN_CONVENTION
    mp = m + s * cfg.alpha
    wt = cfg.omega_tilde()
    return wt * (2 * n + abs(mp) + 1) + s * mp * cfg.omega_c / 2


def _solve_grid():
    """Sector solves for the pinned regression grid, with closed forms.

    Returns (grid, seconds) so the runtime budget judges the actual solve.
    """
    t0 = time.perf_counter()
    grid = []
    for ratio, alpha in _GRID:
        cfg = TrapConfig.from_flux(omega_P=1.0, alpha=alpha, omega_c=ratio)
        results = solve_sectors(cfg, _GRID_SECTORS, k=_GRID_STATES)
        records = sector_records(cfg, results)
        for rec in records:
            rec["ratio"] = ratio
            rec["alpha"] = alpha
            rec["E_closed_form"] = _closed_form(cfg, rec["m"], rec["n"])
        grid.append((cfg, records))
    return grid, time.perf_counter() - t0


def criterion_5(grid=None, solve_seconds=None):
    """Sector solver vs the closed form on the pinned grid, under 60 s."""
    if grid is None:
        grid, solve_seconds = _solve_grid()
    worst = 0.0
    count = 0
    for _, records in grid:
        for rec in records:
            ref = rec["E_closed_form"]
            rel = abs(rec["E"] - ref) / abs(ref)
            worst = max(worst, rel)
            count += 1
    within_budget = solve_seconds <= 60.0
    passed = worst <= 1e-6 and within_budget
    detail = (f"worst relative error {worst:.3e} over {count} states "
              f"(tolerance 1e-06); runtime within 60 s: {within_budget}")
    return CriterionResult(
        number=5, name="spectral oracle agreement", passed=passed,
        detail=detail,
        artifacts={"worst_rel_error": worst, "states": count,
                   "runtime_within_budget": within_budget})


def criterion_6():
    """|omega* - omega_-|/omega_- <= 2 (omega_P/omega_c)^2 at three ratios."""
    gaps = {}
    ok = True
    for ratio in (10.0, 30.0, 100.0):
        cfg = TrapConfig.from_flux(omega_P=1.0, alpha=0.0, omega_c=ratio)
        rep = slow_branch_check(cfg)
        gaps[ratio] = {"relative_gap": rep.relative_gap, "limit": rep.limit,
                       "omega_star": rep.omega_star,
                       "omega_minus": rep.omega_minus}
        ok = ok and rep.ok
    detail = "; ".join(
        f"ratio {r:g}: gap {gaps[r]['relative_gap']:.3e} <= {gaps[r]['limit']:.3e}"
        for r in (10.0, 30.0, 100.0))
    return CriterionResult(
        number=6, name="reduced-model asymptotics", passed=ok, detail=detail,
        artifacts={str(int(r)): gaps[r] for r in gaps})


def criterion_7(grid=None):
    """Literal residual bound on the grid, plus slow-branch monotonicity."""
    if grid is None:
        grid, _ = _solve_grid()
    s = SIGN_CONVENTION
    worst_margin = -math.inf
    all_bounded = True
    for cfg, records in grid:
        for rec in records:
            r = rec["m"] - s * cfg.alpha - cfg.mu * cfg.omega_c * rec["rho2"] / 2
            bound = 2.0 * math.sqrt(2.0 * cfg.mu * max(rec["Ek"], 0.0)
                                    * rec["rho2"])
            all_bounded = all_bounded and abs(r) <= bound + 1e-12
            worst_margin = max(worst_margin, abs(r) - bound)
    scan = residual_scan(TrapConfig.from_flux(omega_P=1.0, alpha=0.25),
                         ratios=(10.0, 20.0, 50.0, 100.0), sector=0)
    mono = scan["monotone_decreasing"]
    passed = all_bounded and mono
    detail = (f"all states within bound: {all_bounded} (worst |r|-bound "
              f"margin {worst_margin:.3e}); slow ground residual "
              f"monotonically decreasing over ratios 10,20,50,100: {mono}")
    return CriterionResult(
        number=7, name="J_z identity residual", passed=passed, detail=detail,
        artifacts={"all_bounded": all_bounded, "worst_margin": worst_margin,
                   "monotone_decreasing": mono,
                   "scan_residuals": [rec["residual"] for rec in scan["records"]]})


def criterion_8():
    """Gauge checks: pure-gauge residual, circulation at three radii, J_z."""
    cfg = DEFAULT_TRAP
    pg = check_pure_gauge(cfg)
    residual_ok = pg.max_residual <= 1e-12
    circs = {}
    circ_ok = True
    for factor in (1.5, 3.0, 10.0):
        c = circulation_over_2pi(cfg, radius=factor * cfg.a)
        circs[f"{factor:g}a"] = c
        circ_ok = circ_ok and abs(c - cfg.alpha) <= 1e-8 * cfg.alpha
    sym = gauge_invariance_of_Jz(cfg)
    passed = residual_ok and circ_ok and sym.passed
    detail = (f"max pure-gauge residual {pg.max_residual:.3e} over "
              f"{pg.n_points} points; circulation/2pi = alpha at three radii "
              f"to 1e-08: {circ_ok}; J_z gauge invariance symbolic: "
              f"{sym.passed}")
    return CriterionResult(
        number=8, name="gauge checks", passed=passed, detail=detail,
        artifacts={"max_pure_gauge_residual": pg.max_residual,
                   "circulations_over_2pi": circs,
                   "symbolic_pass": sym.passed})


def _secular_runs():
    """Frequency extraction at the two pinned stiffness ratios."""
    freq = {}
    for ratio, tol in ((20.0, 0.05), (100.0, 0.005)):
        drv = PaulDrive.for_ratio(ratio, omega_rf=4.0 * ratio * ratio)
        wp = drv.omega_P(1.0)
        cfg = TrapConfig(omega_P=wp)
        traj = integrate_trajectory(
            ClassicalState(x1=0.1, x2=0.0), cfg, drv,
            T=24 * 2.0 * math.pi / wp, record="x1")
        est = extract_secular_frequency(traj)
        freq[ratio] = {"omega_P": wp, "estimate": est.omega,
                       "rel_error": abs(est.omega - wp) / wp,
                       "tolerance": tol,
                       "ok": abs(est.omega - wp) / wp <= tol}
    return freq


def criterion_9():
    """Secular validation: symbolic V_eff, frequency accuracy, ell."""
    drv = PaulDrive(V=3.0, d=1.0, omega_rf=50.0)
    sym = effective_potential_check(drv, 1.0)
    freq = _secular_runs()
    freq_ok = all(freq[r]["ok"] for r in freq)

    cfg = TrapConfig(omega_P=1.0, omega_c=5.0, omega_0=2.0, a=0.2)
    drv2 = PaulDrive.for_ratio(20.0, omega_rf=1600.0)
    traj = integrate_trajectory(
        ClassicalState(x1=0.5, x2=0.0, v2=0.05), cfg, drv2,
        T=24 * 2.0 * math.pi / drv2.omega_P(1.0))
    ell = traj.canonical_angular_momentum()
    ell_drift = float(np.abs(ell - ell[0]).max() / abs(ell[0]))
    ell_ok = ell_drift <= 1e-6

    passed = sym.passed and freq_ok and ell_ok
    detail = (f"V_eff symbolic: {sym.passed}; frequency errors "
              f"{freq[20.0]['rel_error']:.3e} (<=5%), "
              f"{freq[100.0]['rel_error']:.3e} (<=0.5%); ell relative drift "
              f"{ell_drift:.3e} (<=1e-06)")
    return CriterionResult(
        number=9, name="secular validation", passed=passed, detail=detail,
        artifacts={"effective_potential": {
                       "passed": sym.passed, "computed": sym.computed,
                       "expected": sym.expected,
                       "coefficient_ratio": sym.coefficient_ratio},
                   "frequency": {str(int(k)): v for k, v in freq.items()},
                   "ell_rel_drift": ell_drift})


def _generate_tree(digest):
    """One full pass over criteria 1..9 plus the report artifacts."""
    grid, solve_seconds = _solve_grid()
    results = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(grid, solve_seconds),
        criterion_6(),
        criterion_7(grid),
        criterion_8(),
        criterion_9(),
    ]
    files = {}
    for res in results:
        files[f"criteria/criterion_{res.number:02d}.json"] = reporting.dumps({
            "number": res.number, "name": res.name, "passed": res.passed,
            "detail": res.detail, "artifacts": res.artifacts})
    model = reduce(perp_hamiltonian(), trap_constraints(), config=DEFAULT_TRAP)
    files["reports/reduction.json"] = reporting.dumps(
        dict(reduction_report(model), config_hash=digest))
    records = []
    for _, recs in grid:
        records.extend(recs)
    files["reports/spectrum.jsonl"] = reporting.dump_lines(
        reporting.attach_hash(records, digest))
    files["reports/gauge.json"] = reporting.dumps(
        dict(gauge_block(DEFAULT_TRAP), config_hash=digest))
    scan = residual_scan(TrapConfig.from_flux(omega_P=1.0, alpha=0.25),
                         ratios=(10.0, 20.0, 50.0, 100.0), sector=0)
    files["reports/residual_scan.json"] = reporting.dumps(
        dict(scan, config_hash=digest))
    return results, files


@dataclass(frozen=True)
class VerificationReport:
    results: tuple
    all_passed: bool
    files: dict
    config_hash: str

    @property
    def lines(self):
        return [r.line for r in self.results]


def verify_all(digest=""):
    """Run every criterion; build the artifact tree and check its stability.

    The tree is generated twice from scratch and compared byte-for-byte;
    that comparison is criterion 10.  Returns a VerificationReport whose
    files map relative paths to text content.
    """
    results, files = _generate_tree(digest)
    results_again, files_again = _generate_tree(digest)
    stable = files == files_again and len(results) == len(results_again) and \
        all(a.passed == b.passed and a.detail == b.detail
            for a, b in zip(results, results_again))
    detail = ("artifact tree regenerated from scratch is byte-identical: "
              f"{stable} ({len(files)} files)")
    results = list(results)
    results.append(CriterionResult(
        number=10, name="determinism", passed=stable, detail=detail,
        artifacts={"files_compared": len(files), "byte_identical": stable}))
    files["criteria/criterion_10.json"] = reporting.dumps({
        "number": 10, "name": "determinism", "passed": stable,
        "detail": detail,
        "artifacts": {"files_compared": len(files), "byte_identical": stable}})
    all_passed = all(r.passed for r in results)
    files["summary.json"] = reporting.dumps({
        "all_passed": all_passed,
        "config_hash": digest,
        "criteria": [{"number": r.number, "name": r.name, "passed": r.passed,
                      "detail": r.detail} for r in results],
    })
    return VerificationReport(results=tuple(results), all_passed=all_passed,
                              files=files, config_hash=digest)
