"""Strict, line-oriented run configuration.

Format: `[section]` headers followed by `key = value` lines; sections are
[trap], [drive], [solver] and [sweep].  Keys before the first header belong
to [trap].  Blank lines and lines starting with `#` are ignored; anything
else is an error with its line number.  Values are exact rationals ("1/4",
"0.25", "3", "1e-3" all work), so consistency checks such as
alpha = mu*omega_0*a^2/2 carry no float rounding.
"""

from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from .core import TrapConfig
from .errors import ConfigError
from .secular import PaulDrive
from .spectral import FINITE_SOLENOID, FLUX_LINE, RadialProblem

_SECTION_KEYS = {
    "trap": ("a", "alpha", "mu", "omega_0", "omega_P", "omega_c"),
    "drive": ("V", "d", "omega_rf"),
    "solver": ("N", "R", "k", "model"),
    "sweep": ("alphas", "ratios", "sectors"),
}
_MODELS = (FLUX_LINE, FINITE_SOLENOID)


def _fraction(text, line, key):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        pass
    try:
        return Fraction(Decimal(text))
    except (InvalidOperation, ValueError):
        raise ConfigError(f"{key}: not a number: {text!r}", line=line, key=key)


def _integer(text, line, key):
    fr = _fraction(text, line, key)
    if fr.denominator != 1:
        raise ConfigError(f"{key}: expected an integer, got {text!r}",
                          line=line, key=key)
    return int(fr)


def _number_list(text, line, key, integer=False):
    items = [t.strip() for t in text.split(",")]
    if any(not t for t in items):
        raise ConfigError(f"{key}: empty element in list", line=line, key=key)
    if integer:
        return tuple(_integer(t, line, key) for t in items)
    return tuple(_fraction(t, line, key) for t in items)


@dataclass(frozen=True)
class SolverOptions:
    N: int = 4000
    R: float = None          # None: radius chosen from the trap scale
    k: int = 6
    model: str = FLUX_LINE


@dataclass(frozen=True)
class SweepOptions:
    ratios: tuple = ()       # omega_c/omega_P values
    alphas: tuple = ()
    sectors: tuple = ()      # angular sectors m


@dataclass(frozen=True)
class RunConfig:
    trap: TrapConfig
    drive: PaulDrive
    solver: SolverOptions
    sweep: SweepOptions
    canonical: str           # normalized text; hash this for provenance


def _scan(text):
    """(section, key, value, line) tuples under strict syntax rules."""
    section = "trap"
    seen_sections = set()
    seen_keys = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError("malformed section header", line=lineno)
            name = line[1:-1].strip()
            if name not in _SECTION_KEYS:
                raise ConfigError(f"unknown section [{name}]", line=lineno)
            if name in seen_sections:
                raise ConfigError(f"duplicate section [{name}]", line=lineno)
            seen_sections.add(name)
            section = name
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {line!r}", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError("empty key or value", line=lineno, key=key or None)
        if key not in _SECTION_KEYS[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]",
                              line=lineno, key=key)
        if (section, key) in seen_keys:
            raise ConfigError(f"duplicate key {key!r} in [{section}]",
                              line=lineno, key=key)
        seen_keys.add((section, key))
        yield section, key, value, lineno


def parse_config(text):
    """Validated RunConfig from config text; errors carry line numbers."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    values = {}
    lines = {}
    sections_present = set()
    for section, key, value, lineno in _scan(text):
        sections_present.add(section)
        values[(section, key)] = value
        lines[(section, key)] = lineno

    def take(section, key, conv, default=None):
        raw = values.pop((section, key), None)
        if raw is None:
            return default
        return conv(raw, lines[(section, key)], key)

    trap_fr = {}
    for key in ("mu", "omega_P", "omega_c", "omega_0", "a", "alpha"):
        fr = take("trap", key, _fraction)
        if fr is not None:
            trap_fr[key] = fr

    # flux consistency in exact arithmetic, before any float enters
    mu = trap_fr.get("mu", Fraction(1))
    if "alpha" in trap_fr:
        if "omega_0" in trap_fr:
            a = trap_fr.get("a", Fraction(0))
            derived = mu * trap_fr["omega_0"] * a * a / 2
            if trap_fr["alpha"] != derived:
                raise ConfigError(
                    f"alpha = {trap_fr['alpha']} inconsistent with "
                    f"mu*omega_0*a^2/2 = {derived}",
                    line=lines[("trap", "alpha")], key="alpha")
        else:
            # flux given directly: back-solve the solenoid frequency
            a = trap_fr.setdefault("a", Fraction(1))
            if a == 0:
                if trap_fr["alpha"] != 0:
                    raise ConfigError("alpha != 0 requires a > 0 or omega_0",
                                      line=lines[("trap", "alpha")], key="alpha")
                trap_fr["omega_0"] = Fraction(0)
            else:
                trap_fr["omega_0"] = trap_fr["alpha"] * 2 / (mu * a * a)
    if "omega_P" not in trap_fr:
        raise ConfigError("missing mandatory key omega_P in [trap]",
                          key="omega_P")

    def _wrap_invariant(build, section):
        try:
            return build()
        except ConfigError as exc:
            key = exc.key
            line = lines.get((section, key))
            if line is not None and exc.line is None:
                raise ConfigError(str(exc), line=line, key=key) from None
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    trap = _wrap_invariant(lambda: TrapConfig(
        omega_P=float(trap_fr["omega_P"]),
        mu=float(mu),
        omega_c=float(trap_fr.get("omega_c", 0)),
        omega_0=float(trap_fr.get("omega_0", 0)),
        a=float(trap_fr.get("a", 0))), "trap")

    drive = None
    drive_fr = None
    if "drive" in sections_present:
        drive_fr = {k: take("drive", k, _fraction) for k in ("V", "d", "omega_rf")}
        missing = sorted(k for k, v in drive_fr.items() if v is None)
        if missing:
            raise ConfigError(
                f"[drive] requires V, d and omega_rf (missing: {', '.join(missing)})")
        drive = _wrap_invariant(lambda: PaulDrive(
            V=float(drive_fr["V"]), d=float(drive_fr["d"]),
            omega_rf=float(drive_fr["omega_rf"])), "drive")

    def _radius(raw, lineno, key):
        if raw == "auto":
            return None
        fr = _fraction(raw, lineno, key)
        return fr

    n_grid = take("solver", "N", _integer, 4000)
    radius = take("solver", "R", _radius)
    k_states = take("solver", "k", _integer, 6)
    model = take("solver", "model", lambda raw, lineno, key: raw, FLUX_LINE)
    if model not in _MODELS:
        raise ConfigError(f"model must be one of {', '.join(_MODELS)}",
                          line=lines.get(("solver", "model")), key="model")
    if k_states < 1:
        raise ConfigError("k must be >= 1", line=lines.get(("solver", "k")),
                          key="k")
    # grid invariants are owned by the solver input type; re-check them here
    _wrap_invariant(lambda: RadialProblem(
        m=0, model=model, N=n_grid,
        R=None if radius is None else float(radius)), "solver")
    solver = SolverOptions(N=n_grid,
                           R=None if radius is None else float(radius),
                           k=k_states, model=model)

    sweep = SweepOptions(
        ratios=take("sweep", "ratios", _number_list, ()),
        alphas=take("sweep", "alphas", _number_list, ()),
        sectors=take("sweep", "sectors",
                     lambda raw, lineno, key: _number_list(raw, lineno, key,
                                                           integer=True), ()))
    for r in sweep.ratios:
        if r < 0:
            raise ConfigError("ratios must be non-negative",
                              line=lines.get(("sweep", "ratios")), key="ratios")
    for al in sweep.alphas:
        if al < 0:
            raise ConfigError("alphas must be non-negative",
                              line=lines.get(("sweep", "alphas")), key="alphas")

    canonical = _canonical_text(trap_fr, mu, drive_fr if drive else None,
                                solver, radius, sweep)
    return RunConfig(trap=trap, drive=drive, solver=solver, sweep=sweep,
                     canonical=canonical)


def _fr_str(fr):
    return str(fr)


def _canonical_text(trap_fr, mu, drive_fr, solver, radius, sweep):
    """Semantics-complete normalized rendering: defaults resolved, keys sorted.

    Two configs meaning the same run canonicalize identically, whitespace
    and comments notwithstanding.
    """
    a = trap_fr.get("a", Fraction(0))
    omega_0 = trap_fr.get("omega_0", Fraction(0))
    alpha = trap_fr.get("alpha", mu * omega_0 * a * a / 2)
    out = ["[trap]"]
    for key, fr in (("a", a), ("alpha", alpha), ("mu", mu),
                    ("omega_0", omega_0), ("omega_P", trap_fr["omega_P"]),
                    ("omega_c", trap_fr.get("omega_c", Fraction(0)))):
        out.append(f"{key} = {_fr_str(fr)}")
    if drive_fr is not None:
        out.append("[drive]")
        for key in ("V", "d", "omega_rf"):
            out.append(f"{key} = {_fr_str(drive_fr[key])}")
    out.append("[solver]")
    out.append(f"N = {solver.N}")
    out.append(f"R = {'auto' if radius is None else _fr_str(radius)}")
    out.append(f"k = {solver.k}")
    out.append(f"model = {solver.model}")
    if sweep.ratios or sweep.alphas or sweep.sectors:
        out.append("[sweep]")
        if sweep.alphas:
            out.append("alphas = " + ", ".join(_fr_str(x) for x in sweep.alphas))
        if sweep.ratios:
            out.append("ratios = " + ", ".join(_fr_str(x) for x in sweep.ratios))
        if sweep.sectors:
            out.append("sectors = " + ", ".join(str(x) for x in sweep.sectors))
    return "\n".join(out) + "\n"


# The configuration the CLI falls back to when no --config is given; also
# shipped verbatim as configs/default.cfg.  alpha is stated redundantly so
# the text doubles as a worked example of the exact consistency check.
DEFAULT_CONFIG_TEXT = """\
# Unit-mass ion, omega_c/omega_P = 1, flux alpha = 1/4, and an RF drive
# well inside the secular regime (stability ratio about 24).

[trap]
mu = 1
omega_P = 1
omega_c = 1
omega_0 = 1/2
a = 1
alpha = 1/4

[drive]
V = 3
d = 1
omega_rf = 50

[solver]
N = 4000
R = auto
k = 6
model = flux_line

[sweep]
ratios = 10, 20, 50, 100
alphas = 0, 1/4
sectors = -2, -1, 0, 1, 2
"""
