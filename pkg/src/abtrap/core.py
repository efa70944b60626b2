"""Shared physical configuration and build-time constants.

Natural units throughout: hbar = 1, and the charge and light-speed factors are
folded into the frequencies and the dimensionless flux alpha.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ConfigError

# Orientation of the angular-momentum coupling in the radial solver, fixed
# once by matching sector spectra against a dense 2D Cartesian
# diagonalization with alpha = 0, omega_c > 0: the slow (magnetron-like)
# tower sits at positive m exactly when s = -1.  See tests/oracles.py.
SIGN_CONVENTION = -1


def _exact(value):
    """Exact rational image of a config value (floats taken bit-exactly)."""
    return Fraction(value)


@dataclass(frozen=True)
class TrapConfig:
    """Physical parameters of the trap.

    alpha is the dimensionless flux mu*omega_0*a**2/2 (hbar = 1).  It may be
    passed explicitly, in which case it must equal that combination exactly;
    omitted, it is derived.  omega_0 may carry either sign.
    """

    omega_P: float
    mu: float = 1.0
    omega_c: float = 0.0
    omega_0: float = 0.0
    a: float = 0.0
    alpha: float = None

    def __post_init__(self):
        if not (self.mu > 0):
            raise ConfigError("mu must be positive", key="mu")
        if not (self.omega_P > 0):
            raise ConfigError("omega_P must be positive", key="omega_P")
        if self.omega_c < 0:
            raise ConfigError("omega_c must be non-negative", key="omega_c")
        if self.a < 0:
            raise ConfigError("a must be non-negative", key="a")
        derived = _exact(self.mu) * _exact(self.omega_0) * _exact(self.a) ** 2 / 2
        if self.alpha is None:
            object.__setattr__(self, "alpha", float(derived))
        else:
            if _exact(self.alpha) != derived:
                raise ConfigError(
                    f"alpha = {self.alpha} inconsistent with mu*omega_0*a^2/2 = {float(derived)}",
                    key="alpha")
        for name in ("mu", "omega_c", "omega_0", "omega_P", "a", "alpha"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ConfigError(f"{name} must be finite", key=name)
            object.__setattr__(self, name, float(v))

    @classmethod
    def from_flux(cls, omega_P, alpha, mu=1.0, omega_c=0.0, a=1.0):
        """Config with a prescribed flux: omega_0 is back-solved from alpha.

        Convenient for flux-line studies where only alpha matters.
        """
        if a <= 0:
            raise ConfigError("from_flux requires a > 0", key="a")
        ex_a = _exact(a)
        omega_0 = _exact(alpha) * 2 / (_exact(mu) * ex_a * ex_a)
        return cls(omega_P=omega_P, mu=mu, omega_c=omega_c,
                   omega_0=float(omega_0), a=a, alpha=alpha)

    def omega_tilde(self):
        """sqrt(omega_P^2 + omega_c^2/4), the fast radial frequency."""
        return math.sqrt(self.omega_P ** 2 + self.omega_c ** 2 / 4)

    def omega_minus(self):
        """Slow-branch frequency omega_tilde - omega_c/2."""
        return self.omega_tilde() - self.omega_c / 2

    def omega_star(self):
        """Reduced-model frequency omega_P^2/omega_c; requires omega_c > 0."""
        if self.omega_c == 0:
            raise ConfigError("omega_star undefined at omega_c = 0", key="omega_c")
        return self.omega_P ** 2 / self.omega_c

    def mu_star(self):
        """Reduced-model effective mass mu*omega_c^2/omega_P^2."""
        if self.omega_c == 0:
            raise ConfigError("mu_star undefined at omega_c = 0", key="omega_c")
        return self.mu * self.omega_c ** 2 / self.omega_P ** 2
