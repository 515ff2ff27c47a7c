"""Time evolution: exact spinor propagation, the 9x9 spin coupling matrix,
and direct integration of the vector phase-space equation for quadratic
potentials with uniform fields."""
from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize_scalar

from .errors import SchemeMismatchError, UnsupportedPotentialError
from .grids import PhaseSpaceGrid
from .spin_frames import SpinFrame, spin_operators
from .vector_portrait import SpinorDensity, VectorDistribution, save_vector

ORACLE_SCHEMES = ("split-step-strang", "rk4-ode")
WIGNER_SCHEME = "wigner-spectral"


@dataclass(frozen=True)
class EMFieldConfig:
    """Electromagnetic environment of a charged particle with a magnetic moment.

    phi is either a (c0, c1, c2) tuple for c0 + c1 q + c2 q^2 or a callable
    phi(q, t); a_long is the uniform longitudinal vector potential component
    (float or callable of t); b_field is the uniform magnetic field 3-vector.
    The transverse vector-potential slopes implied by b_field are
    dA_y/dq = B_z and dA_z/dq = -B_y; a longitudinal-only grid carries no
    orbital coupling for them, so b_field enters through the magnetic-moment
    term alone.  B_x has no A(q)-only representation and is treated the same
    way.
    """

    phi: object = None
    a_long: object = 0.0
    b_field: np.ndarray = dc_field(default_factory=lambda: np.zeros(3))
    e: float = 1.0
    c_light: float = 1.0
    kappa: float = 1.0
    mass: float = 1.0
    spin: float = 1.0
    transverse_slopes: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "b_field", np.asarray(self.b_field, dtype=float))
        if self.b_field.shape != (3,) or not np.all(np.isfinite(self.b_field)):
            raise ValueError("b_field must be a finite 3-vector")
        for name in ("e", "c_light", "kappa", "mass", "spin"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.transverse_slopes is not None:
            ay, az = self.transverse_slopes
            if abs(ay - self.b_field[2]) > 1e-12 or abs(az + self.b_field[1]) > 1e-12:
                raise ValueError(
                    "declared transverse vector-potential slopes are inconsistent "
                    "with b_field (need dAy/dq = B_z, dAz/dq = -B_y)")

    @property
    def is_quadratic(self) -> bool:
        return self.phi is None or isinstance(self.phi, (tuple, list))

    def phi_coeffs(self) -> tuple[float, float, float]:
        if self.phi is None:
            return (0.0, 0.0, 0.0)
        if not self.is_quadratic:
            raise UnsupportedPotentialError(
                "potential is a general callable; only quadratic potentials "
                "truncate the evolution operators exactly")
        c = tuple(float(v) for v in self.phi)
        if len(c) != 3:
            raise ValueError("quadratic potential needs exactly (c0, c1, c2)")
        return c

    def phi_at(self, q: np.ndarray, t: float = 0.0):
        if self.phi is None:
            return np.zeros_like(q)
        if callable(self.phi):
            return self.phi(q, t)
        c0, c1, c2 = self.phi_coeffs()
        return c0 + c1 * q + c2 * q * q

    def dphi_dq(self, q: np.ndarray, t: float = 0.0):
        c0, c1, c2 = self.phi_coeffs()
        return c1 + 2.0 * c2 * q

    def a_at(self, t: float = 0.0) -> float:
        return float(self.a_long(t)) if callable(self.a_long) else float(self.a_long)

    def zeeman_matrix(self) -> np.ndarray:
        """-(kappa/s) s_hat . B, acting on the spin index."""
        sx, sy, sz = spin_operators(self.spin)
        bx, by, bz = self.b_field
        return -(self.kappa / self.spin) * (bx * sx + by * sy + bz * sz)

    def describe(self) -> dict:
        return {
            "phi": list(self.phi_coeffs()) if self.is_quadratic else "callable",
            "a_long": self.a_at(0.0) if not callable(self.a_long) else "callable",
            "b_field": self.b_field.tolist(),
            "e": self.e, "c_light": self.c_light, "kappa": self.kappa,
            "mass": self.mass, "spin": self.spin,
        }


@dataclass(frozen=True)
class PropagatorConfig:
    dt: float
    n_steps: int
    scheme: str = "split-step-strang"
    save_every: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.n_steps < 1 or self.save_every < 1:
            raise ValueError("n_steps and save_every must be >= 1")


@dataclass(frozen=True)
class SpinCouplingMatrix:
    """Constant 9x9 generator of the frame weights under a uniform field."""

    entries: np.ndarray
    field_value: np.ndarray


def spin_coupling_matrix(frame: SpinFrame, b_field, kappa: float, s: float,
                         hbar: float = 1.0) -> SpinCouplingMatrix:
    """S_jk = (2/hbar) Im Tr{U_j H_s D_k} with H_s = -(kappa/s) s_hat . B.

    Valid for uniform fields, where the frame weights of any state obey
    dw/dt = S w exactly.
    """
    b_field = np.asarray(b_field, dtype=float)
    sx, sy, sz = spin_operators(s)
    h_s = -(kappa / s) * (b_field[0] * sx + b_field[1] * sy + b_field[2] * sz)
    traces = np.einsum("jab,bc,kca->jk", frame.dequantizer, h_s, frame.quantizer)
    entries = (2.0 / hbar) * traces.imag
    return SpinCouplingMatrix(entries=entries, field_value=b_field)


# ---------------------------------------------------------------------------
# Hamiltonian action and the exact-oracle propagator
# ---------------------------------------------------------------------------

def hamiltonian_apply(psi: np.ndarray, grid: PhaseSpaceGrid, fld: EMFieldConfig,
                      t: float = 0.0) -> np.ndarray:
    """H psi for a spinor field psi of shape (2s+1, n).

    Kinetic term (p - eA/c)^2 / 2m evaluated spectrally, scalar potential
    pointwise, magnetic-moment term as an exact matrix on the spin index.
    """
    psi = np.asarray(psi, dtype=complex)
    hk = grid.hbar * grid.k_fft
    kin_diag = (hk - fld.e * fld.a_at(t) / fld.c_light) ** 2 / (2.0 * fld.mass)
    out = np.fft.ifft(kin_diag[None, :] * np.fft.fft(psi, axis=1), axis=1)
    out += fld.e * fld.phi_at(grid.q, t)[None, :] * psi
    out += fld.zeeman_matrix() @ psi
    return out


def expectation(psi: np.ndarray, grid: PhaseSpaceGrid, op_psi: np.ndarray) -> float:
    return float(np.sum(psi.conj() * op_psi).real * grid.dx)


@dataclass
class Trajectory:
    """Uniformly sampled spinor-density frames with conserved-quantity logs."""

    times: np.ndarray
    states: list
    energies: np.ndarray
    traces: np.ndarray
    field: EMFieldConfig
    scheme: str

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


def _strang_steps(psis: np.ndarray, grid: PhaseSpaceGrid, fld: EMFieldConfig,
                  t0: float, dt: float, n_sub: int) -> np.ndarray:
    """Advance an ensemble (k, d, n) by n_sub Strang substeps of size dt."""
    hbar = grid.hbar
    hk = grid.hbar * grid.k_fft
    static = not (callable(fld.phi) or callable(fld.a_long))
    if static:
        half_v = np.exp(-0.5j * dt * fld.e * fld.phi_at(grid.q, t0) / hbar)
        half_z = expm(-0.5j * dt * fld.zeeman_matrix() / hbar)
        kin = np.exp(-1j * dt * (hk - fld.e * fld.a_at(t0) / fld.c_light) ** 2
                     / (2.0 * fld.mass * hbar))
    t = t0
    for _ in range(n_sub):
        if not static:
            tm = t + 0.5 * dt
            half_v = np.exp(-0.5j * dt * fld.e * fld.phi_at(grid.q, tm) / hbar)
            half_z = expm(-0.5j * dt * fld.zeeman_matrix() / hbar)
            kin = np.exp(-1j * dt * (hk - fld.e * fld.a_at(tm) / fld.c_light) ** 2
                         / (2.0 * fld.mass * hbar))
        psis = half_v[None, None, :] * np.einsum("ab,kbn->kan", half_z, psis)
        psis = np.fft.ifft(kin[None, None, :] * np.fft.fft(psis, axis=2), axis=2)
        psis = half_v[None, None, :] * np.einsum("ab,kbn->kan", half_z, psis)
        t += dt
    return psis


def _rk4_steps(psis: np.ndarray, grid: PhaseSpaceGrid, fld: EMFieldConfig,
               t0: float, dt: float, n_sub: int) -> np.ndarray:
    def deriv(p, t):
        return np.stack([hamiltonian_apply(pk, grid, fld, t) for pk in p]) / (1j * grid.hbar)

    t = t0
    for _ in range(n_sub):
        k1 = deriv(psis, t)
        k2 = deriv(psis + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = deriv(psis + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = deriv(psis + dt * k3, t + dt)
        psis = psis + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
    return psis


def evolve_oracle(rho0: SpinorDensity, fld: EMFieldConfig, prop: PropagatorConfig,
                  t0: float = 0.0) -> Trajectory:
    """Unitary propagation of a spinor density as a pure-state ensemble.

    The density is eigendecomposed once; each significant eigenvector is
    propagated (Strang splitting by default, RK4 optional) and frames are
    reassembled every save_every steps.
    """
    if prop.scheme not in ORACLE_SCHEMES:
        raise SchemeMismatchError(
            f"oracle propagation supports {ORACLE_SCHEMES}, got {prop.scheme!r}")
    grid = rho0.grid
    probs, fields = rho0.eigen_decomposition()
    psis = np.stack(fields)
    stepper = _strang_steps if prop.scheme == "split-step-strang" else _rk4_steps

    def assemble(p):
        blocks = np.einsum("k,kai,kbj->abij", probs, p, p.conj())
        return SpinorDensity(grid=grid, blocks=blocks)

    def energy(p, t):
        return sum(w * expectation(pk, grid, hamiltonian_apply(pk, grid, fld, t))
                   for w, pk in zip(probs, p))

    times = [t0]
    states = [assemble(psis)]
    energies = [energy(psis, t0)]
    traces = [states[0].trace()]
    t = t0
    done = 0
    while done < prop.n_steps:
        chunk = min(prop.save_every, prop.n_steps - done)
        psis = stepper(psis, grid, fld, t, prop.dt, chunk)
        t += chunk * prop.dt
        done += chunk
        state = assemble(psis)
        times.append(t)
        states.append(state)
        energies.append(energy(psis, t))
        traces.append(state.trace())
    return Trajectory(times=np.asarray(times), states=states,
                      energies=np.asarray(energies), traces=np.asarray(traces),
                      field=fld, scheme=prop.scheme)


# ---------------------------------------------------------------------------
# direct integration of the vector phase-space equation
# ---------------------------------------------------------------------------

@dataclass
class VectorTrajectory:
    times: np.ndarray
    frames: list
    field: EMFieldConfig
    scheme: str
    norm_sums: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


def evolve_wigner_vector(v0: VectorDistribution, fld: EMFieldConfig,
                         prop: PropagatorConfig) -> VectorTrajectory:
    """Evolve a vector Wigner distribution under a quadratic potential and
    uniform fields.

    The drift is the exact phase-space flow -((p - eA/c)/m) d_q + e phi'(q) d_p
    (the operator series truncates at first derivatives for this field class),
    applied as spectral shears in Strang order; the spin coupling dw/dt = S w
    is applied as an exact matrix exponential (it commutes with the drift).
    """
    if prop.scheme != WIGNER_SCHEME:
        raise SchemeMismatchError(
            f"vector Wigner evolution uses scheme {WIGNER_SCHEME!r}, got {prop.scheme!r}")
    if v0.representation != "wigner":
        raise ValueError("initial distribution must be in the wigner representation")
    if not fld.is_quadratic:
        raise UnsupportedPotentialError(
            "direct vector evolution requires a quadratic potential; "
            "use residual checking for general fields")
    if callable(fld.a_long):
        raise UnsupportedPotentialError("direct vector evolution requires static a_long")

    grid = v0.grid
    dt = prop.dt
    q = grid.q
    p = grid.p
    kq = 2.0 * np.pi * np.fft.fftfreq(grid.n, grid.dx)
    kp = 2.0 * np.pi * np.fft.fftfreq(grid.n, grid.dp)

    vel = (p - fld.e * fld.a_at() / fld.c_light) / fld.mass
    force_shift = fld.e * fld.dphi_dq(q) * dt          # p-translation per step
    drift_phase = np.exp(-1j * np.outer(kq, vel) * dt)          # (n_q, n_p)
    half_kick = np.exp(0.5j * np.outer(force_shift, kp))        # (n_q, n_p)
    full_kick = half_kick * half_kick

    s_mat = spin_coupling_matrix(v0.frame, fld.b_field, fld.kappa, fld.spin,
                                 grid.hbar).entries

    w = v0.components.astype(complex)

    def run_chunk(w, n_sub):
        # Strang kick-drift-kick with interior half-kicks fused; the exact
        # spin rotation commutes with the drift and is applied once
        w = np.fft.fft(w, axis=2)
        w = np.fft.ifft(half_kick[None] * w, axis=2)
        for i in range(n_sub):
            w = np.fft.ifft(drift_phase[None] * np.fft.fft(w, axis=1), axis=1)
            kick = half_kick if i == n_sub - 1 else full_kick
            w = np.fft.ifft(kick[None] * np.fft.fft(w, axis=2), axis=2)
        return np.einsum("jk,kqp->jqp", expm(s_mat * (n_sub * dt)), w)

    def frame_of(w, t):
        return VectorDistribution(
            representation="wigner", components=w.real, frame=v0.frame,
            grid=grid, time=t, imag_residues=np.max(np.abs(w.imag), axis=(1, 2)))

    times = [v0.time]
    frames = [frame_of(w, v0.time)]
    t = v0.time
    done = 0
    while done < prop.n_steps:
        chunk = min(prop.save_every, prop.n_steps - done)
        w = run_chunk(w, chunk)
        t += chunk * dt
        done += chunk
        frames.append(frame_of(w, t))
        times.append(t)
    norm_sums = np.asarray([f.normalization_sum() for f in frames])
    return VectorTrajectory(times=np.asarray(times), frames=frames, field=fld,
                            scheme=prop.scheme, norm_sums=norm_sums)


# ---------------------------------------------------------------------------
# frequency extraction and export
# ---------------------------------------------------------------------------

def fit_precession_frequency(times: np.ndarray, series: np.ndarray,
                             n_harmonics: int = 2) -> float:
    """Angular frequency of a (multi-)harmonic signal by variable projection.

    Linear least squares in the harmonic amplitudes at fixed omega, outer
    bounded minimization over omega seeded by the FFT peak.  Avoids FFT
    leakage bias at short durations.
    """
    times = np.asarray(times, dtype=float)
    series = np.asarray(series, dtype=float)
    dt = times[1] - times[0]
    spec = np.abs(np.fft.rfft(series - series.mean(), n=8 * len(series)))
    freqs = 2.0 * np.pi * np.fft.rfftfreq(8 * len(series), dt)
    guess = freqs[int(np.argmax(spec))]
    if guess == 0.0:
        guess = freqs[1]

    def ssr(omega):
        cols = [np.ones_like(times)]
        for h in range(1, n_harmonics + 1):
            cols.append(np.cos(h * omega * times))
            cols.append(np.sin(h * omega * times))
        a = np.stack(cols, axis=1)
        resid = series - a @ np.linalg.lstsq(a, series, rcond=None)[0]
        return float(resid @ resid)

    res = minimize_scalar(ssr, bounds=(0.5 * guess, 1.5 * guess), method="bounded",
                          options={"xatol": 1e-14})
    return float(res.x)


def export_trajectory(traj: VectorTrajectory, directory: str | Path,
                      write_frames: bool = False) -> None:
    """Manifest JSON, conserved-quantity CSV, and optionally per-frame fields."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "times": traj.times.tolist(),
        "scheme": traj.scheme,
        "field": traj.field.describe(),
        "n_frames": len(traj.frames),
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=1))
    lines = ["t,trace,energy,norm_sum,residual_max"]
    for t, f, ns in zip(traj.times, traj.frames, traj.norm_sums):
        lines.append(f"{t!r},,,{ns!r},")
    (directory / "conserved.csv").write_text("\n".join(lines) + "\n")
    if write_frames:
        for i, f in enumerate(traj.frames):
            save_vector(f, directory / f"frame_{i:04d}")


def export_oracle_trajectory(traj: Trajectory, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "times": traj.times.tolist(),
        "scheme": traj.scheme,
        "field": traj.field.describe(),
        "n_frames": len(traj.states),
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=1))
    lines = ["t,trace,energy,norm_sum,residual_max"]
    for t, tr, en in zip(traj.times, traj.traces, traj.energies):
        lines.append(f"{t!r},{tr!r},{en!r},{tr!r},")
    (directory / "conserved.csv").write_text("\n".join(lines) + "\n")
