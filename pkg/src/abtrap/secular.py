"""Classical validation of the trap: full RF dynamics versus the secular model.

The ion sees the oscillating quadrupole directly; the time-independent
picture (the effective potential with frequency omega_P) is an averaged
description.  This module integrates the full equations of motion with the
magnetic forces included, extracts the slow spectral line from the
trajectory, and provides the exact-rational check that the averaged
potential really is mu*omega_P^2*(rho^2 + 4 z^2)/2.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .algebra import PhaseSpace, parse_expression, serialize_expression
from .core import TrapConfig
from .errors import NoSecularPeak, NumericalFailure

try:
    import numba
    _HAVE_NUMBA = True
except ImportError:   # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

# largest sample count handed to the FFT stage of the frequency estimator;
# longer records are strided down first (record length, and therefore bin
# width, is unaffected)
_FFT_CAP = 1 << 21


@dataclass(frozen=True)
class PaulDrive:
    """Oscillating quadrupole drive: potential (V/2d^2)(z^2 - rho^2/2) cos(W t).

    The derived quantities depend on the ion mass, so they are exposed as
    methods: Omega(mu) is the secular base frequency with
    Omega^2 = sqrt(2) V/(mu d^2), and omega_P(mu) = Omega^2/(4 omega_rf).
    """

    V: float
    d: float
    omega_rf: float

    def __post_init__(self):
        for name in ("V", "d", "omega_rf"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite")

    def Omega(self, mu):
        return math.sqrt(math.sqrt(2.0) * self.V / (mu * self.d * self.d))

    def omega_P(self, mu):
        return self.Omega(mu) ** 2 / (4.0 * self.omega_rf)

    def ratio(self, mu):
        """Stiffness ratio omega_rf/Omega governing secular validity."""
        return self.omega_rf / self.Omega(mu)

    def validate(self, mu):
        r = self.ratio(mu)
        if r < 10.0:
            raise ValueError(
                f"omega_rf/Omega = {r:.3g} < 10: secular description invalid")
        if r < 20.0:
            warnings.warn(
                f"omega_rf/Omega = {r:.3g} < 20: secular description marginal",
                stacklevel=3)
        return r

    @classmethod
    def for_ratio(cls, ratio, omega_rf, mu=1.0, d=1.0):
        """Drive with a prescribed omega_rf/Omega at the given mass."""
        Om = omega_rf / ratio
        V = Om * Om * mu * d * d / math.sqrt(2.0)
        return cls(V=V, d=d, omega_rf=omega_rf)


@dataclass(frozen=True)
class EffectivePotentialReport:
    passed: bool
    computed: str
    expected: str
    coefficient_ratio: float


def effective_potential_check(drive, mu, potential=None):
    """Exact-rational check of the averaged (ponderomotive) potential.

    Builds grad(U).grad(U)/(4 mu omega_rf^2) for the quadrupole and
    compares it with mu*omega_P^2*(rho^2 + 4z^2)/2, where omega_P^2 =
    V^2/(8 mu^2 d^4 omega_rf^2) by the adopted Omega definition.  The
    square root of two only ever appears squared, so both sides live in
    the rational field and the comparison has zero tolerance.  A custom
    potential must be a multiple of the same quadrupole shape.
    """
    if drive is not None and not isinstance(drive, PaulDrive):
        raise TypeError("drive must be a PaulDrive")
    if not (mu > 0 and math.isfinite(mu)):
        raise ValueError("mu must be positive")
    space = PhaseSpace(parameters=("mu", "V", "d", "Omega_rf"),
                       positive=("mu", "V", "d", "Omega_rf"),
                       aux=("z",))
    quad = parse_expression(space, "z^2 - (x1^2 + x2^2)/2")
    if potential is None:
        u = parse_expression(space, "V/(2*d^2)") * quad
    else:
        u = parse_expression(space, potential)
        scale = u / quad
        if not scale.is_parameter_only():
            raise ValueError(
                "potential is not a quadrupole of the z^2 - rho^2/2 shape")
    grad2 = sum((u.diff(n) ** 2 for n in ("x1", "x2", "z")), start=space.zero)
    computed = grad2 / parse_expression(space, "4*mu*Omega_rf^2")
    wp2 = parse_expression(space, "V^2/(8*mu^2*d^4*Omega_rf^2)")
    expected = parse_expression(space, "mu/2") * wp2 \
        * parse_expression(space, "x1^2 + x2^2 + 4*z^2")
    # curvature ratio between the axial and planar directions
    czz = computed.diff("z").diff("z")
    cxx = computed.diff("x1").diff("x1")
    ratio = czz / cxx
    if not ratio.is_constant():
        raise ValueError("averaged potential is not quadratic")
    passed = (computed - expected).is_zero
    return EffectivePotentialReport(
        passed=passed,
        computed=serialize_expression(computed),
        expected=serialize_expression(expected),
        coefficient_ratio=float(ratio.constant_value()))


@dataclass(frozen=True)
class ClassicalState:
    """Point of the classical 3D motion."""

    x1: float
    x2: float
    z: float = 0.0
    v1: float = 0.0
    v2: float = 0.0
    vz: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        for name in ("x1", "x2", "z", "v1", "v2", "vz", "t"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def exterior(self, config):
        return math.hypot(self.x1, self.x2) > config.a


def _rk4_loop(x1, x2, z, v1, v2, vz, wc, w0, a_sq, cdrive, wrf, t0, dt,
              nsteps, stride, record_full, out):
    # Fixed-step RK4 for the Lorentz + oscillating quadrupole force.
    # Mirrored by a compiled version; keep the operation order unchanged.
    row = 0
    if record_full:
        out[0, 0] = x1
        out[0, 1] = x2
        out[0, 2] = z
        out[0, 3] = v1
        out[0, 4] = v2
        out[0, 5] = vz
    else:
        out[0, 0] = x1
    row = 1
    sixth = dt / 6.0
    half = 0.5 * dt
    for step in range(nsteps):
        t = t0 + step * dt
        c1 = cdrive * math.cos(wrf * t)
        c2 = cdrive * math.cos(wrf * (t + half))
        c4 = cdrive * math.cos(wrf * (t + dt))

        r2 = x1 * x1 + x2 * x2
        w = wc + w0 if r2 < a_sq else wc
        a1 = w * v2 + c1 * x1
        a2 = -w * v1 + c1 * x2
        a3 = -2.0 * c1 * z

        X1 = x1 + half * v1
        X2 = x2 + half * v2
        Z = z + half * vz
        U1 = v1 + half * a1
        U2 = v2 + half * a2
        UZ = vz + half * a3
        r2 = X1 * X1 + X2 * X2
        w = wc + w0 if r2 < a_sq else wc
        b1 = w * U2 + c2 * X1
        b2 = -w * U1 + c2 * X2
        b3 = -2.0 * c2 * Z

        Y1 = x1 + half * U1
        Y2 = x2 + half * U2
        ZZ = z + half * UZ
        W1 = v1 + half * b1
        W2 = v2 + half * b2
        WZ = vz + half * b3
        r2 = Y1 * Y1 + Y2 * Y2
        w = wc + w0 if r2 < a_sq else wc
        d1 = w * W2 + c2 * Y1
        d2 = -w * W1 + c2 * Y2
        d3 = -2.0 * c2 * ZZ

        E1 = x1 + dt * W1
        E2 = x2 + dt * W2
        EZ = z + dt * WZ
        F1 = v1 + dt * d1
        F2 = v2 + dt * d2
        FZ = vz + dt * d3
        r2 = E1 * E1 + E2 * E2
        w = wc + w0 if r2 < a_sq else wc
        e1 = w * F2 + c4 * E1
        e2 = -w * F1 + c4 * E2
        e3 = -2.0 * c4 * EZ

        x1 = x1 + sixth * (v1 + 2.0 * (U1 + W1) + F1)
        x2 = x2 + sixth * (v2 + 2.0 * (U2 + W2) + F2)
        z = z + sixth * (vz + 2.0 * (UZ + WZ) + FZ)
        v1 = v1 + sixth * (a1 + 2.0 * (b1 + d1) + e1)
        v2 = v2 + sixth * (a2 + 2.0 * (b2 + d2) + e2)
        vz = vz + sixth * (a3 + 2.0 * (b3 + d3) + e3)

        if (step + 1) % stride == 0:
            if not (math.isfinite(x1) and math.isfinite(x2)
                    and math.isfinite(z) and math.isfinite(v1)
                    and math.isfinite(v2) and math.isfinite(vz)):
                return -(step + 1)
            if record_full:
                out[row, 0] = x1
                out[row, 1] = x2
                out[row, 2] = z
                out[row, 3] = v1
                out[row, 4] = v2
                out[row, 5] = vz
            else:
                out[row, 0] = x1
            row += 1
    return row


if _HAVE_NUMBA:
    _rk4_compiled = numba.njit(cache=False, fastmath=False)(_rk4_loop)
else:   # pragma: no cover
    _rk4_compiled = _rk4_loop


@dataclass
class Trajectory:
    """Sampled classical trajectory.

    x1 is always recorded; the full state (x, v) only when the run was
    integrated with record="full".  Sample times are t0 + k*dt_sample.
    """

    config: TrapConfig
    drive: object
    dt: float
    t0: float
    dt_sample: float
    x1: np.ndarray
    x: np.ndarray = None
    v: np.ndarray = None

    @property
    def n(self):
        return self.x1.size

    @property
    def t(self):
        return self.t0 + self.dt_sample * np.arange(self.n)

    @property
    def duration(self):
        return self.dt_sample * (self.n - 1)

    def _require_full(self):
        if self.x is None:
            raise ValueError("run was recorded with record='x1'; "
                             "full state is unavailable")

    def speed(self):
        self._require_full()
        return np.sqrt(np.sum(self.v * self.v, axis=1))

    def canonical_angular_momentum(self):
        self._require_full()
        return canonical_angular_momentum(self.config, self.x, self.v)

    def secular_energy(self, block):
        """Secular energy per block of `block` consecutive samples.

        Velocity and position are averaged over the block first (one RF
        period removes the micromotion exactly), then the kinetic term and
        the effective potential are composed from the smoothed motion.
        """
        self._require_full()
        if block < 1 or self.n < block:
            raise ValueError("block does not fit the record")
        mu = self.config.mu
        nblocks = self.n // block
        xb = self.x[:nblocks * block].reshape(nblocks, block, 3).mean(axis=1)
        vb = self.v[:nblocks * block].reshape(nblocks, block, 3).mean(axis=1)
        e = 0.5 * mu * np.sum(vb * vb, axis=1)
        if self.drive is not None:
            wp = self.drive.omega_P(mu)
            rho2 = xb[:, 0] ** 2 + xb[:, 1] ** 2
            e = e + 0.5 * mu * wp * wp * (rho2 + 4.0 * xb[:, 2] ** 2)
        return e


def canonical_angular_momentum(config, x, v):
    """ell = mu(x1 v2 - x2 v1) + flux-through-orbit term, region-aware.

    Outside the solenoid the enclosed flux is mu*omega_c*rho^2/2 + alpha;
    inside, the solenoid field is still spread out and contributes through
    its own frequency instead of through alpha.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    mu = config.mu
    rho2 = x[..., 0] ** 2 + x[..., 1] ** 2
    mech = mu * (x[..., 0] * v[..., 1] - x[..., 1] * v[..., 0])
    outside = mu * config.omega_c * rho2 / 2.0 + config.alpha
    inside = mu * (config.omega_c + config.omega_0) * rho2 / 2.0
    return mech + np.where(rho2 > config.a ** 2, outside, inside)


def integrate_trajectory(state0, config, drive, T, dt=None, store_every=None,
                         record="full"):
    """Integrate the full time-dependent equations of motion.

    Fixed-step RK4 with the Lorentz force of the confining field (and the
    solenoid field inside rho < a) plus the oscillating quadrupole force.
    The step must resolve the drive: dt <= 2 pi/(40 omega_rf); without a
    drive the caller chooses dt explicitly.  Samples are stored every
    store_every steps (default: 8 per RF period).  record="x1" keeps only
    the planar coordinate used by the frequency estimator, which makes
    very long runs affordable but skips the secular-energy audit.
    """
    if not isinstance(state0, ClassicalState):
        raise TypeError("state0 must be a ClassicalState")
    if record not in ("full", "x1"):
        raise ValueError("record must be 'full' or 'x1'")
    if T <= 0:
        raise ValueError("T must be positive")
    if drive is not None:
        drive.validate(config.mu)
        rf = 2.0 * math.pi / drive.omega_rf
        if dt is None:
            dt = rf / 40.0
        if dt > rf / 40.0 * (1.0 + 1e-12):
            raise ValueError(
                f"dt = {dt:g} too coarse for the drive (need <= {rf / 40.0:g})")
        cdrive = drive.V / (2.0 * config.mu * drive.d * drive.d)
        wrf = drive.omega_rf
        if store_every is None:
            store_every = max(1, int(round(rf / 8.0 / dt)))
    else:
        if dt is None:
            raise ValueError("dt is required when no drive is present")
        cdrive = 0.0
        wrf = 1.0
        if store_every is None:
            store_every = 1
    if dt <= 0:
        raise ValueError("dt must be positive")
    store_every = int(store_every)
    if store_every < 1:
        raise ValueError("store_every must be >= 1")
    nsteps = int(round(T / dt))
    if nsteps < 1:
        raise ValueError("T shorter than one step")
    nsamples = 1 + nsteps // store_every
    full = record == "full"
    out = np.empty((nsamples, 6 if full else 1), dtype=float)
    code = _rk4_compiled(
        state0.x1, state0.x2, state0.z, state0.v1, state0.v2, state0.vz,
        config.omega_c, config.omega_0, config.a * config.a,
        cdrive, wrf, state0.t, dt, nsteps, store_every, full, out)
    if code < 0:
        step = -code
        raise NumericalFailure(
            f"state became non-finite at step {step} (t = {state0.t + step * dt:g})")
    traj = Trajectory(config=config, drive=drive, dt=dt, t0=state0.t,
                      dt_sample=store_every * dt,
                      x1=out[:, 0].copy() if full else out[:, 0],
                      x=out[:, 0:3] if full else None,
                      v=out[:, 3:6] if full else None)
    if full:
        _audit_secular_energy(traj)
    return traj


def _audit_secular_energy(traj):
    # drift of the RF-period-averaged secular energy must stay below 1%
    if traj.drive is None:
        block = min(max(traj.n // 16, 1), 64)
    else:
        rf = 2.0 * math.pi / traj.drive.omega_rf
        block = int(round(rf / traj.dt_sample))
    if block < 1 or traj.n < 4 * block:
        return
    e = traj.secular_energy(block)
    first = float(e[0])
    last = float(e[-1])
    drift = abs(last - first) / max(abs(first), 1e-300)
    if abs(first) > 1e-12 and drift > 0.01:
        raise NumericalFailure(
            f"secular energy drifted {drift:.2%} over the run "
            f"({first:g} -> {last:g}); refine dt")


@dataclass(frozen=True)
class FrequencyEstimate:
    omega: float
    uncertainty: float
    n_samples: int
    cutoff: float


def _window_cos4(n):
    return (0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)) ** 2


def _zoom_refine(sw, dt, omega0, dz):
    # three-point discrete-time Fourier probe around omega0, log-parabola
    n = sw.size
    amps = np.empty(3)
    for k, f in enumerate((omega0 - dz, omega0, omega0 + dz)):
        acc = 0.0 + 0.0j
        for lo in range(0, n, 1 << 20):
            hi = min(lo + (1 << 20), n)
            tt = dt * np.arange(lo, hi)
            acc += np.dot(sw[lo:hi], np.exp(-1j * f * tt))
        amps[k] = abs(acc)
    if np.any(amps <= 0.0):
        return omega0
    y = np.log(amps)
    den = y[0] - 2.0 * y[1] + y[2]
    if den >= 0.0:
        return omega0
    delta = 0.5 * (y[0] - y[2]) / den
    if abs(delta) > 1.0:
        return omega0
    return omega0 + delta * dz


def extract_secular_frequency(trajectory, cutoff=None):
    """Dominant sub-RF line of x1(t): windowed periodogram plus refinement.

    The record is strided down to a bounded FFT size (bin width depends on
    the record length, not the sample count), windowed with a squared Hann
    taper, zero-padded eightfold, and the peak is polished by a three-point
    Fourier probe at a sixty-fourth of a bin.  The quoted uncertainty is
    one padded bin width.  Frequencies are angular.
    """
    drive = trajectory.drive
    if drive is not None:
        wp = drive.omega_P(trajectory.config.mu)
        periods = trajectory.duration * wp / (2.0 * math.pi)
        if periods < 20.0:
            raise ValueError(
                f"record covers {periods:.1f} secular periods; need >= 20")
    sig = trajectory.x1
    dts = trajectory.dt_sample
    stride = max(1, -(-sig.size // _FFT_CAP))
    sig = sig[::stride]
    dts = dts * stride
    n = sig.size
    if n < 64:
        raise ValueError("record too short")
    nyquist = math.pi / dts
    if cutoff is None:
        cutoff = 0.999 * nyquist
        if drive is not None:
            cutoff = min(cutoff, 0.5 * drive.omega_rf)
    cutoff = min(cutoff, 0.999 * nyquist)
    sw = (sig - sig.mean()) * _window_cos4(n)
    nfft = 8 * (1 << int(math.ceil(math.log2(n))))
    spectrum = np.abs(np.fft.rfft(sw, nfft))
    dw = 2.0 * math.pi / (nfft * dts)
    top = int(cutoff / dw)
    if top < 5:
        raise NoSecularPeak("analysis band below the drive is empty")
    band = spectrum[1:top]
    i = 1 + int(np.argmax(band))
    peak = spectrum[i]
    if peak <= 0.0 or peak < 5.0 * float(np.median(band)) or i < 4:
        raise NoSecularPeak("no dominant line below half the drive frequency")
    y = np.log(spectrum[i - 1:i + 2])
    den = y[0] - 2.0 * y[1] + y[2]
    delta = 0.5 * (y[0] - y[2]) / den if den < 0.0 else 0.0
    if abs(delta) > 1.0:
        delta = 0.0
    omega0 = (i + delta) * dw
    omega = _zoom_refine(sw, dts, omega0, dw / 64.0)
    return FrequencyEstimate(omega=float(omega), uncertainty=float(dw),
                             n_samples=n, cutoff=float(cutoff))
