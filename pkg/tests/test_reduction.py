import json
import random
from fractions import Fraction

import pytest

from abtrap import (
    PhaseSpace,
    ReductionImpossible,
    ShapeMismatch,
    SignUndecidableError,
    TrapConfig,
    poisson_bracket,
)
from abtrap.reduction import (
    Classification,
    ConstraintSet,
    angular_momentum,
    constraint_matrix,
    dirac_bracket,
    dirac_structure,
    flux_term,
    legendre_check,
    perp_hamiltonian,
    quantize,
    reduce,
    reduction_report,
    surface_bindings,
    trap_constraints,
)
from test_algebra import random_poly


@pytest.fixture(scope="module")
def sp():
    return PhaseSpace()


@pytest.fixture(scope="module")
def full(sp):
    return trap_constraints(sp)


class TestConstraintMatrix:
    def test_full_family_second_class(self, sp, full):
        cm = constraint_matrix(full)
        mu, wc = sp.vars("mu", "omega_c")
        assert cm.classification is Classification.SECOND_CLASS
        assert cm.entries[0][1] == mu * wc
        assert cm.entries[1][0] == -mu * wc
        assert cm.entries[0][0].is_zero and cm.entries[1][1].is_zero
        assert cm.determinant == mu * mu * wc * wc

    def test_flux_only_family_degenerate(self, sp):
        cm = constraint_matrix(trap_constraints(sp, cyclotron=False))
        assert cm.classification is Classification.DEGENERATE
        assert all(e.is_zero for row in cm.entries for e in row)

    def test_uniform_field_family_matches_full(self, sp, full):
        # dropping the flux leaves the bracket matrix unchanged
        cm_full = constraint_matrix(full)
        cm_hat = constraint_matrix(trap_constraints(sp, flux=False))
        assert cm_hat.entries == cm_full.entries
        assert cm_hat.classification is Classification.SECOND_CLASS

    def test_undecidable_sign_is_an_error(self, sp):
        x1, x2, p1, p2 = sp.vars("x1", "x2", "p1", "p2")
        mu, w0 = sp.vars("mu", "omega_0")
        cs = ConstraintSet((p1 + mu * w0 * x2 / 2, p2 - mu * w0 * x1 / 2),
                           provenance="unsigned test family")
        with pytest.raises(SignUndecidableError):
            constraint_matrix(cs)

    def test_numeric_matrix(self, full):
        cfg = TrapConfig(omega_P=1.0, mu=2.0, omega_c=3.0, omega_0=0.5, a=1.0)
        rows, det = constraint_matrix(full).at(cfg)
        assert rows == [[0.0, 6.0], [-6.0, 0.0]]
        assert det == 36.0

    def test_duplicate_constraints_rejected(self, sp):
        p1 = sp.var("p1")
        with pytest.raises(ValueError):
            ConstraintSet((p1, p1 * 2 / 2))


class TestDiracBracket:
    def test_coordinate_bracket_value(self, sp, full):
        # orientation is pinned by {x1, p1} = 1 and C_12 = +mu*omega_c:
        # the reduced coordinates then satisfy {x1, x2}_D = -1/(mu*omega_c)
        mu, wc = sp.vars("mu", "omega_c")
        assert dirac_bracket(sp.var("x1"), sp.var("x2"), full) == -1 / (mu * wc)

    def test_self_bracket_vanishes(self, sp, full):
        assert dirac_bracket(sp.var("x1"), sp.var("x1"), full).is_zero

    def test_strong_conditions_randomized(self, sp, full):
        rng = random.Random(314159)
        for _ in range(50):
            f = random_poly(sp, rng)
            for phi in full:
                assert dirac_bracket(phi, f, full).is_zero

    def test_antisymmetry_and_linearity(self, sp, full):
        # raw combination: antisymmetry and linearity hold before surface
        # reduction, and substitution preserves both, so test them there
        rng = random.Random(2718)
        for _ in range(8):
            f = random_poly(sp, rng)
            g = random_poly(sp, rng)
            h = random_poly(sp, rng)
            ab = dirac_bracket(f, g, full, on_surface=False)
            ba = dirac_bracket(g, f, full, on_surface=False)
            assert (ab + ba).is_zero
            lhs = dirac_bracket(f + 3 * g, h, full, on_surface=False)
            rhs = (dirac_bracket(f, h, full, on_surface=False)
                   + 3 * dirac_bracket(g, h, full, on_surface=False))
            assert (lhs - rhs).is_zero

    def test_on_surface_antisymmetry_small(self, sp, full):
        x1, x2, p1, p2 = sp.vars("x1", "x2", "p1", "p2")
        for f, g in ((x1 * p1, x2), (p1 * p2, x1 * x2), (x1 * x1, p2)):
            assert (dirac_bracket(f, g, full) + dirac_bracket(g, f, full)).is_zero

    def test_degenerate_raises(self, sp):
        cs = trap_constraints(sp, cyclotron=False)
        with pytest.raises(ReductionImpossible) as err:
            dirac_bracket(sp.var("x1"), sp.var("x2"), cs)
        assert err.value.matrix is not None
        assert err.value.matrix.classification is Classification.DEGENERATE

    def test_order_of_constraints_irrelevant(self, sp, full):
        swapped = ConstraintSet((full.constraints[1], full.constraints[0]),
                                provenance="swapped")
        a = dirac_bracket(sp.var("x1"), sp.var("x2"), full)
        b = dirac_bracket(sp.var("x1"), sp.var("x2"), swapped)
        assert a == b

    def test_surface_bindings_solve_constraints(self, sp, full):
        from abtrap import substitute
        bindings = surface_bindings(full)
        for phi in full:
            assert substitute(phi, bindings).is_zero


class TestDiracStructure:
    def test_table_is_consistent(self, sp, full):
        ds = dirac_structure(full)
        gamma = dirac_bracket(sp.var("x1"), sp.var("x2"), full)
        assert ds[("x1", "x2")] == gamma
        assert ds[("x2", "x1")] == -gamma
        assert ds.independent_variables == ("x1", "x2")
        strings = ds.table_strings()
        assert strings["{x1,x1}"] == "0"


class TestReduce:
    def test_paper_family(self, sp, full):
        cfg = TrapConfig(omega_P=2.0, mu=1.0, omega_c=8.0, omega_0=0.5, a=1.0)
        rm = reduce(perp_hamiltonian(sp), full, cfg)
        mu, wc, wP = sp.vars("mu", "omega_c", "omega_P")
        assert rm.effective_mass == mu * wc * wc / (wP * wP)
        assert rm.effective_frequency == wP * wP / wc
        assert rm.flux == flux_term(sp)
        assert rm.effective_mass_value() == pytest.approx(16.0)
        assert rm.effective_frequency_value() == pytest.approx(0.5)
        assert rm.flux_value() == pytest.approx(0.25)
        # mu* omega*^2 = mu omega_P^2 identically
        assert rm.effective_mass * rm.effective_frequency ** 2 == mu * wP * wP

    def test_canonical_pair_bracket_is_one(self, sp, full):
        rm = reduce(perp_hamiltonian(sp), full)
        x, p = rm.canonical_pair
        assert dirac_bracket(x, p, full) == 1

    def test_surface_hamiltonian(self, sp, full):
        rm = reduce(perp_hamiltonian(sp), full)
        mu, wP = sp.vars("mu", "omega_P")
        x1, x2 = sp.vars("x1", "x2")
        assert rm.reduced_hamiltonian == mu * wP * wP * (x1 * x1 + x2 * x2) / 2

    def test_degenerate_family_raises(self, sp):
        cs = trap_constraints(sp, cyclotron=False)
        with pytest.raises(ReductionImpossible):
            reduce(perp_hamiltonian(sp, cyclotron=False), cs)

    def test_numerically_degenerate_config_raises(self, sp, full):
        cfg = TrapConfig(omega_P=1.0, mu=1.0, omega_c=0.0, omega_0=0.5, a=1.0)
        with pytest.raises(ReductionImpossible):
            reduce(perp_hamiltonian(sp), full, cfg)

    def test_non_quadratic_surface_rejected(self, sp, full):
        x1 = sp.var("x1")
        with pytest.raises(ShapeMismatch):
            reduce(perp_hamiltonian(sp) + x1 ** 3, full)


class TestQuantize:
    def test_fractional_zero_point(self, sp, full):
        cfg = TrapConfig.from_flux(omega_P=1.0, alpha=0.25, omega_c=10.0)
        rm = reduce(perp_hamiltonian(sp), full, cfg)
        spectrum = quantize(rm)
        alpha = flux_term(sp)
        assert spectrum.zero_point_Jz == alpha + Fraction(1, 2)
        assert spectrum.J_AB == alpha
        assert spectrum.canonical_Jz_value(0) == pytest.approx(0.75)
        assert spectrum.canonical_Jz_value(1) == pytest.approx(1.75)

    def test_combined_trap_half_quantum(self, sp):
        cs = trap_constraints(sp, flux=False)
        rm = reduce(perp_hamiltonian(sp, flux=False), cs)
        spectrum = quantize(rm)
        assert spectrum.zero_point_Jz == Fraction(1, 2)
        assert spectrum.J_AB.is_zero

    def test_ladder_spacing(self, sp, full):
        rm = reduce(perp_hamiltonian(sp), full)
        spectrum = quantize(rm)
        assert spectrum.energy(1) - spectrum.energy(0) == rm.effective_frequency
        assert spectrum.energy(5) - spectrum.energy(4) == rm.effective_frequency

    def test_rescaling_invariance(self, sp, full):
        # omega_c -> lam*omega_c changes mu*, omega* but not the J_z ladder
        from abtrap import substitute
        lam = Fraction(7, 2)
        rm = reduce(perp_hamiltonian(sp), full)
        spectrum = quantize(rm)
        scaled_zero = substitute(spectrum.zero_point_Jz, {"omega_c": lam * sp.var("omega_c")})
        scaled_jab = substitute(spectrum.J_AB, {"omega_c": lam * sp.var("omega_c")})
        assert scaled_zero == spectrum.zero_point_Jz
        assert scaled_jab == spectrum.J_AB
        scaled_omega = substitute(rm.effective_frequency,
                                  {"omega_c": lam * sp.var("omega_c")})
        assert scaled_omega == rm.effective_frequency / lam


class TestLegendre:
    def test_generic_pass(self):
        rep = legendre_check()
        assert rep.passed
        assert rep.difference.is_zero
        assert rep.momenta_match

    def test_no_flux_specialization(self):
        cfg = TrapConfig(omega_P=1.0, omega_c=5.0)
        rep = legendre_check(cfg)
        assert rep.passed

    def test_perturbation_detected(self):
        rep = legendre_check(perturbation="x1^2")
        assert not rep.passed
        assert str(rep.difference) == "x1^2"
        assert rep.momenta_match


class TestReport:
    def test_report_structure_and_determinism(self, sp, full):
        cfg = TrapConfig.from_flux(omega_P=1.0, alpha=0.25, omega_c=4.0)
        docs = []
        for _ in range(2):
            rm = reduce(perp_hamiltonian(sp), full, cfg)
            docs.append(json.dumps(reduction_report(rm), sort_keys=True))
        assert docs[0] == docs[1]
        doc = json.loads(docs[0])
        assert doc["constraint_matrix"]["classification"] == "second_class"
        assert doc["constraint_matrix"]["entries"][0][1] == "mu*omega_c"
        assert doc["values"]["zero_point_Jz"] == pytest.approx(0.75)
        assert doc["spectrum"]["J_AB"] == "(a^2*mu*omega_0)/(2)"

    def test_jz_surface_value(self, sp, full):
        from abtrap import substitute
        jz = angular_momentum(sp)
        surf = substitute(jz, surface_bindings(full))
        mu, wc = sp.vars("mu", "omega_c")
        x1, x2 = sp.vars("x1", "x2")
        assert surf == flux_term(sp) + mu * wc * (x1 * x1 + x2 * x2) / 2
