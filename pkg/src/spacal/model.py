"""Forward signal model for over-the-air phase calibration.

Domain types (array geometry, rank-one channel, per-element phase
deviations, beam schedules, pilots) and the pilot-domain / matched-filter
measurement synthesis. All arrays are complex128; half-wavelength element
spacing is baked into the steering phases.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "UpaGeometry",
    "ChannelParams",
    "PhaseDeviations",
    "BeamSchedule",
    "Pilot",
    "MeasurementSet",
    "upa_response",
    "upa_response_deriv",
    "build_channel",
    "synth_pilot",
    "matched_filter",
    "simulate_measurements",
    "simulate_pilot_blocks",
    "random_deviations",
    "random_schedule",
    "ls_cost",
]

UNIT_MODULUS_TOL = 1e-12
_ANGLE_SLACK = 1e-9


@dataclass(frozen=True)
class UpaGeometry:
    """Rectangular array dimensions with x-major linear element indexing.

    Element (i_x, i_y) (0-based) sits at linear index i_x * y_count + i_y,
    matching the Kronecker ordering of :func:`upa_response`.
    """

    x_count: int
    y_count: int

    def __post_init__(self):
        if self.x_count < 1 or self.y_count < 1:
            raise ValueError(f"array dimensions must be >= 1, got {self.x_count}x{self.y_count}")

    @property
    def size(self) -> int:
        return self.x_count * self.y_count

    @property
    def x_index(self) -> np.ndarray:
        """Per-element x index along the linear ordering."""
        return np.repeat(np.arange(self.x_count), self.y_count)

    @property
    def y_index(self) -> np.ndarray:
        return np.tile(np.arange(self.y_count), self.x_count)


def _check_angle(name: str, value: float, lo: float, hi: float) -> float:
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    if value < lo - _ANGLE_SLACK or value > hi + _ANGLE_SLACK:
        raise ValueError(f"{name}={value} outside [{lo}, {hi}]")
    return float(min(max(value, lo), hi))


@dataclass(frozen=True)
class ChannelParams:
    """Complex gain and the four angles of the rank-one channel.

    theta_* are azimuth-like angles in [-pi/2, pi/2], phi_* elevation-like
    angles in [0, pi]; suffix r = receive side, t = transmit side.
    """

    gamma: complex
    theta_r: float
    phi_r: float
    theta_t: float
    phi_t: float

    def __post_init__(self):
        object.__setattr__(self, "gamma", complex(self.gamma))
        object.__setattr__(self, "theta_r", _check_angle("theta_r", self.theta_r, -np.pi / 2, np.pi / 2))
        object.__setattr__(self, "phi_r", _check_angle("phi_r", self.phi_r, 0.0, np.pi))
        object.__setattr__(self, "theta_t", _check_angle("theta_t", self.theta_t, -np.pi / 2, np.pi / 2))
        object.__setattr__(self, "phi_t", _check_angle("phi_t", self.phi_t, 0.0, np.pi))

    @property
    def zeta(self) -> np.ndarray:
        """Angle vector (theta_r, phi_r, theta_t, phi_t)."""
        return np.array([self.theta_r, self.phi_r, self.theta_t, self.phi_t])


def _require_unit_modulus(name: str, values: np.ndarray) -> None:
    dev = np.max(np.abs(np.abs(values) - 1.0)) if values.size else 0.0
    if dev > UNIT_MODULUS_TOL:
        raise ValueError(f"{name} entries must be unit-modulus (max deviation {dev:.3e})")


@dataclass(frozen=True)
class PhaseDeviations:
    """Unit-modulus per-element, per-RF-chain deviation matrix (M_t x N_RF)."""

    omega: np.ndarray

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=complex)
        if om.ndim != 2:
            raise ValueError(f"omega must be 2-D (M_t x N_RF), got shape {om.shape}")
        _require_unit_modulus("omega", om)
        object.__setattr__(self, "omega", om)

    @classmethod
    def from_phases(cls, phases: np.ndarray) -> "PhaseDeviations":
        return cls(np.exp(1j * np.asarray(phases, dtype=float)))

    @property
    def m_t(self) -> int:
        return self.omega.shape[0]

    @property
    def n_rf(self) -> int:
        return self.omega.shape[1]

    @property
    def phases(self) -> np.ndarray:
        return np.angle(self.omega)


@dataclass(frozen=True)
class BeamSchedule:
    """K transmit patterns (K x M_t x N_RF) and K receive patterns (K x M_r).

    ``f_list[k]`` is the k-th nominal transmit beamformer, ``w_list[k]``
    the k-th receive beamformer; all entries unit-modulus.
    """

    f_list: np.ndarray
    w_list: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f_list, dtype=complex)
        w = np.asarray(self.w_list, dtype=complex)
        if f.ndim != 3 or w.ndim != 2:
            raise ValueError(f"expected f_list (K,M_t,N_RF) and w_list (K,M_r), got {f.shape}, {w.shape}")
        if f.shape[0] != w.shape[0] or f.shape[0] < 1:
            raise ValueError(f"transmit/receive pattern counts differ: {f.shape[0]} vs {w.shape[0]}")
        _require_unit_modulus("f_list", f)
        _require_unit_modulus("w_list", w)
        object.__setattr__(self, "f_list", f)
        object.__setattr__(self, "w_list", w)

    @property
    def k(self) -> int:
        return self.f_list.shape[0]

    @property
    def m_t(self) -> int:
        return self.f_list.shape[1]

    @property
    def n_rf(self) -> int:
        return self.f_list.shape[2]

    @property
    def m_r(self) -> int:
        return self.w_list.shape[1]


@dataclass(frozen=True)
class Pilot:
    """Pilot block S (N_RF x L) with orthogonal rows of squared norm L."""

    s: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=complex)
        if s.ndim != 2:
            raise ValueError(f"pilot must be 2-D (N_RF x L), got shape {s.shape}")
        gram = s @ s.conj().T
        target = s.shape[1] * np.eye(s.shape[0])
        if not np.allclose(gram, target, rtol=0.0, atol=1e-13 * max(s.shape[1], 1)):
            raise ValueError("pilot rows must satisfy S S^H = L I")
        object.__setattr__(self, "s", s)

    @property
    def n_rf(self) -> int:
        return self.s.shape[0]

    @property
    def l(self) -> int:
        return self.s.shape[1]


@dataclass(frozen=True)
class MeasurementSet:
    """Matched-filtered measurements: K rows of length N_RF.

    ``noise_var`` is the per-entry complex variance after matched
    filtering (sigma^2 / L); ``pathloss_beta`` the amplitude-squared
    pathloss folded into the model.
    """

    y_tilde: np.ndarray
    noise_var: float
    pathloss_beta: float = 1.0

    def __post_init__(self):
        y = np.asarray(self.y_tilde, dtype=complex)
        if y.ndim != 2:
            raise ValueError(f"y_tilde must be 2-D (K x N_RF), got shape {y.shape}")
        if self.noise_var < 0:
            raise ValueError("noise_var must be >= 0")
        if self.pathloss_beta <= 0:
            raise ValueError("pathloss_beta must be > 0")
        object.__setattr__(self, "y_tilde", y)

    @property
    def k(self) -> int:
        return self.y_tilde.shape[0]

    @property
    def n_rf(self) -> int:
        return self.y_tilde.shape[1]

    @property
    def y_vec(self) -> np.ndarray:
        """Transmission-major stacking [y_1^T; ...; y_K^T] as a flat vector."""
        return self.y_tilde.reshape(-1)


def upa_response(theta: float, phi: float, geom: UpaGeometry) -> np.ndarray:
    """Steering vector of a uniform planar array at (theta, phi).

    Kronecker product of the x progression exp(j*pi*i_x*sin(theta)sin(phi))
    and the y progression exp(j*pi*i_y*cos(phi)).
    """
    ax = np.exp(1j * np.pi * np.arange(geom.x_count) * (np.sin(theta) * np.sin(phi)))
    ay = np.exp(1j * np.pi * np.arange(geom.y_count) * np.cos(phi))
    return np.kron(ax, ay)


def upa_response_deriv(theta: float, phi: float, geom: UpaGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Analytic (d/dtheta, d/dphi) of :func:`upa_response`."""
    a = upa_response(theta, phi, geom)
    ix = geom.x_index
    iy = geom.y_index
    d_theta = 1j * np.pi * ix * np.cos(theta) * np.sin(phi) * a
    d_phi = 1j * np.pi * (ix * np.sin(theta) * np.cos(phi) - iy * np.sin(phi)) * a
    return d_theta, d_phi


def build_channel(params: ChannelParams, tx_geom: UpaGeometry, rx_geom: UpaGeometry) -> np.ndarray:
    """Rank-one channel gamma * a_r(theta_r, phi_r) a_t(theta_t, phi_t)^H."""
    a_r = upa_response(params.theta_r, params.phi_r, rx_geom)
    a_t = upa_response(params.theta_t, params.phi_t, tx_geom)
    return params.gamma * np.outer(a_r, a_t.conj())


_QUARTER_TURNS = np.array([1.0 + 0.0j, -1.0j, -1.0 + 0.0j, 1.0j])


def synth_pilot(n_rf: int, l: int) -> Pilot:
    """First n_rf rows of the L-point DFT matrix (each row squared-norm L).

    Entries that land on quarter turns are emitted exactly so that
    S S^H = L I holds without rounding for L in {1, 2, 4}.
    """
    if n_rf < 1:
        raise ValueError("n_rf must be >= 1")
    if l < n_rf:
        raise ValueError(f"pilot length {l} too short for {n_rf} orthogonal rows")
    idx = (np.arange(n_rf)[:, None] * np.arange(l)[None, :]) % l
    s = np.exp(-2j * np.pi * idx / l)
    quarter, rem = np.divmod(4 * idx, l)
    exact = rem == 0
    s[exact] = _QUARTER_TURNS[quarter[exact] % 4]
    return Pilot(s)


def matched_filter(blocks: np.ndarray, pilot: Pilot) -> np.ndarray:
    """Collapse pilot-domain blocks (K x L) to per-chain rows (K x N_RF)."""
    return blocks @ pilot.s.conj().T / pilot.l


def _check_dims(deviations: PhaseDeviations, schedule: BeamSchedule,
                tx_geom: UpaGeometry, rx_geom: UpaGeometry) -> None:
    if schedule.m_t != tx_geom.size:
        raise ValueError(f"schedule M_t={schedule.m_t} != transmit array size {tx_geom.size}")
    if schedule.m_r != rx_geom.size:
        raise ValueError(f"schedule M_r={schedule.m_r} != receive array size {rx_geom.size}")
    if deviations.m_t != schedule.m_t or deviations.n_rf != schedule.n_rf:
        raise ValueError(
            f"deviations {deviations.m_t}x{deviations.n_rf} inconsistent with "
            f"schedule {schedule.m_t}x{schedule.n_rf}")


def _noiseless_rows(h: np.ndarray, deviations: PhaseDeviations, schedule: BeamSchedule,
                    beta: float) -> np.ndarray:
    # y_k = sqrt(beta) w_k^H H (F_k o Omega), all k at once
    p = schedule.w_list.conj() @ h                       # (K, M_t)
    a = schedule.f_list * deviations.omega[None, :, :]   # (K, M_t, N_RF)
    return np.sqrt(beta) * np.einsum("km,kmn->kn", p, a)


def simulate_measurements(params: ChannelParams, deviations: PhaseDeviations,
                          schedule: BeamSchedule, pilot: Pilot,
                          tx_geom: UpaGeometry, rx_geom: UpaGeometry,
                          sigma2: float, beta: float = 1.0,
                          seed: int | np.random.Generator = 0) -> MeasurementSet:
    """Synthesize matched-filtered measurements with i.i.d. CN(0, sigma^2/L) noise."""
    _check_dims(deviations, schedule, tx_geom, rx_geom)
    if pilot.n_rf != schedule.n_rf:
        raise ValueError(f"pilot has {pilot.n_rf} rows, schedule uses {schedule.n_rf} chains")
    if sigma2 < 0:
        raise ValueError("sigma2 must be >= 0")
    h = build_channel(params, tx_geom, rx_geom)
    y = _noiseless_rows(h, deviations, schedule, beta)
    noise_var = sigma2 / pilot.l
    if sigma2 > 0:
        rng = np.random.default_rng(seed)
        z = rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
        y = y + np.sqrt(noise_var / 2.0) * z
    return MeasurementSet(y_tilde=y, noise_var=noise_var, pathloss_beta=beta)


def simulate_pilot_blocks(params: ChannelParams, deviations: PhaseDeviations,
                          schedule: BeamSchedule, pilot: Pilot,
                          tx_geom: UpaGeometry, rx_geom: UpaGeometry,
                          sigma2: float, beta: float = 1.0,
                          seed: int | np.random.Generator = 0) -> np.ndarray:
    """Full pilot-domain blocks y_k (K x L), noise CN(0, sigma^2) per entry.

    Matched-filtering these with S^H / L is distributionally identical to
    :func:`simulate_measurements` and agrees exactly in the noiseless case.
    """
    _check_dims(deviations, schedule, tx_geom, rx_geom)
    h = build_channel(params, tx_geom, rx_geom)
    rows = _noiseless_rows(h, deviations, schedule, beta)
    blocks = rows @ pilot.s
    if sigma2 > 0:
        rng = np.random.default_rng(seed)
        z = rng.standard_normal(blocks.shape) + 1j * rng.standard_normal(blocks.shape)
        blocks = blocks + np.sqrt(sigma2 / 2.0) * z
    return blocks


def random_deviations(m_t: int, n_rf: int, epsilon: float,
                      rng: np.random.Generator) -> PhaseDeviations:
    """Deviations with phases i.i.d. uniform on [-epsilon, epsilon] radians."""
    return PhaseDeviations.from_phases(rng.uniform(-epsilon, epsilon, (m_t, n_rf)))


def random_schedule(k: int, m_t: int, n_rf: int, m_r: int,
                    rng: np.random.Generator) -> BeamSchedule:
    """Schedule with phases i.i.d. uniform on [0, 2*pi)."""
    f = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, (k, m_t, n_rf)))
    w = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, (k, m_r)))
    return BeamSchedule(f_list=f, w_list=w)


def ls_cost(measurements: MeasurementSet, schedule: BeamSchedule,
            h: np.ndarray, omega: np.ndarray) -> float:
    """Joint least-squares residual sum_k ||y_k - sqrt(beta) w_k^H H (F_k o Omega)||^2."""
    p = schedule.w_list.conj() @ h
    a = schedule.f_list * omega[None, :, :]
    model = np.sqrt(measurements.pathloss_beta) * np.einsum("km,kmn->kn", p, a)
    resid = measurements.y_tilde - model
    return float(np.sum(resid.real ** 2 + resid.imag ** 2))
