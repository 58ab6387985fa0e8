"""PSK Hadamard codes: construction, optimal rates, and vacuum-or-pulse receivers.

A Hadamard code of length ``N`` (a power of two) patterns binary coherent
amplitudes ``±α`` on ``N`` modes after the columns of the Hadamard matrix
``H_N``; the order-``M`` PSK variant adds ``M`` equally phase-shifted copies.
A passive interferometer with mode matrix ``H_N/√N`` maps every codeword to a
pulse-position-modulated one: a single pulse ``√N·α_m`` on one mode, vacuum
elsewhere.  All rates below are evaluated in that PPM picture, so the pulse
energy is ``ℰ = N·E`` with ``E`` the average energy per mode.

The module provides the code itself (`HadamardCode`), the Holevo-optimal rate
(`optimal_rate`), the cyclic-symmetric Helstrom kernel (`psk_helstrom_prob`),
a practical nulling cascade for M ∈ {3, 4} (`realistic_psk`), the
vacuum-or-pulse detection probabilities at finite or infinite splitting steps
(`vp_prob`), and the receiver/separable rates and their envelope over code
lengths (`had_rate`, `separable_rate`, `envelope`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConvergenceError

__all__ = [
    "DetectionKernel",
    "HadamardCode",
    "classical_capacity",
    "envelope",
    "had_rate",
    "hadamard_matrix",
    "optimal_rate",
    "ppm_transform_check",
    "psk_eigenvalues",
    "psk_helstrom_prob",
    "realistic_psk",
    "separable_rate",
    "vp_prob",
    "vp_vacuum_prob",
]

#: absolute tolerance requested from the adaptive quadrature routines
QUAD_TOL = 1e-10


def _require_power_of_two(n: int) -> None:
    if not (isinstance(n, (int, np.integer)) and n >= 1 and (n & (n - 1)) == 0):
        raise ValueError(f"code length must be a power of two, got {n!r}")


def hadamard_matrix(n: int) -> np.ndarray:
    """Symmetric Hadamard matrix of order ``n`` (a power of two), integer ±1.

    Entry (j, k) is (−1) raised to the bitwise scalar product of the binary
    representations of j and k, so H is symmetric and H·Hᵀ = n·I exactly.
    """
    _require_power_of_two(n)
    idx = np.arange(n, dtype=np.uint64)
    parity = np.zeros((n, n), dtype=np.int64)
    bits = np.bitwise_and.outer(idx, idx)
    while np.any(bits):
        parity ^= (bits & 1).astype(np.int64)
        bits >>= 1
    return 1 - 2 * parity


@dataclass(frozen=True)
class HadamardCode:
    """Order-``m`` PSK Hadamard code of length ``n`` and base amplitude ``alpha``.

    Codeword (k, m') has per-mode amplitudes ``α_{m'}·H_n[:, k]`` with
    ``α_{m'} = α·e^{i2πm'/m}``; the mean energy per mode is ``E = |α|²``.
    """

    n: int
    m: int
    alpha: complex

    def __post_init__(self) -> None:
        _require_power_of_two(self.n)
        if not (isinstance(self.m, (int, np.integer)) and self.m >= 1):
            raise ValueError(f"number of phases must be a positive integer, got {self.m!r}")

    @property
    def energy(self) -> float:
        return abs(self.alpha) ** 2

    @property
    def phase_amplitudes(self) -> np.ndarray:
        """The ``m`` rotated amplitudes α_{m'}."""
        return self.alpha * np.exp(2j * np.pi * np.arange(self.m) / self.m)

    @property
    def codewords(self) -> np.ndarray:
        """N×(N·M) amplitude matrix; column m'·N + k is α_{m'}·H_N[:, k]."""
        h = hadamard_matrix(self.n).astype(complex)
        return np.hstack([a_m * h for a_m in self.phase_amplitudes])


def ppm_transform_check(code: HadamardCode) -> float:
    """Max deviation of (H_N/√N)·codeword from a single pulse √N·α_{m'} on slot k."""
    h = hadamard_matrix(code.n)
    transformed = (h / math.sqrt(code.n)) @ code.codewords
    target = np.zeros_like(transformed)
    for m_idx, a_m in enumerate(code.phase_amplitudes):
        cols = slice(m_idx * code.n, (m_idx + 1) * code.n)
        target[:, cols] = math.sqrt(code.n) * a_m * np.eye(code.n)
    return float(np.max(np.abs(transformed - target)))


def psk_eigenvalues(m: int, energy: float) -> np.ndarray:
    """Eigenvalues λ_ℓ(ℰ)·M of the uniform M-PSK coherent ensemble Gram structure.

    λ_ℓ(ℰ) = Σ_h exp[−(1−e^{i2πh/M})ℰ − i2πℓh/M]; real, non-negative, Σλ_ℓ = M.
    """
    if m < 1:
        raise ValueError("need at least one phase")
    if energy < 0:
        raise ValueError("energy must be non-negative")
    h = np.arange(m)
    terms = np.exp(-(1.0 - np.exp(2j * np.pi * h / m)) * energy)
    lam = np.fft.fft(terms)
    if np.max(np.abs(lam.imag)) > 1e-10:
        raise ConvergenceError("PSK eigenvalues acquired a non-negligible imaginary part")
    return np.maximum(lam.real, 0.0)


def classical_capacity(energy: float) -> float:
    """Capacity C(E) = (E+1)log₂(E+1) − E·log₂E of the lossless bosonic channel."""
    e = float(energy)
    if e < 0:
        raise ValueError("energy must be non-negative")
    if e == 0.0:
        return 0.0
    return (e + 1.0) * math.log2(e + 1.0) - e * math.log2(e)


def _h2(p: float) -> float:
    """h(p) = −p·log₂p with h(0) = 0."""
    return 0.0 if p <= 0.0 else -p * math.log2(p)


def optimal_rate(n: int, m: int, energy_per_mode: float) -> float:
    """Holevo-optimal rate (bits per mode) of the PSK Hadamard code.

    Works in the PPM picture: the average state splits into the vacuum-coupled
    block, with one Gram eigenvalue ν⁰₀ = [λ₀+(N−1)Me^{−ℰ}]/(MN) and N−1 copies
    of ν⁰₊ = [λ₀−Me^{−ℰ}]/(MN), plus N copies of each ν^{ℓ>0} = λ_ℓ/(MN).
    """
    _require_power_of_two(n)
    e_tot = n * float(energy_per_mode)
    if e_tot == 0.0:
        return 0.0
    lam = psk_eigenvalues(m, e_tot)
    common = m * math.exp(-e_tot)
    nu_00 = (lam[0] + (n - 1) * common) / (m * n)
    nu_0p = max((lam[0] - common) / (m * n), 0.0)
    entropy = _h2(nu_00) + (n - 1) * _h2(nu_0p)
    for lam_l in lam[1:]:
        entropy += n * _h2(lam_l / (m * n))
    return entropy / n


def psk_helstrom_prob(l: int, m_in: int, m: int, energy: float) -> float:
    """Optimal probability of guessing phase ℓ when phase m_in of an M-PSK
    coherent set with per-state energy ``energy`` was sent:
    |Σ_j e^{−i2πj(ℓ−m)/M}·√λ_j / M|².
    """
    lam = psk_eigenvalues(m, energy)
    idx = np.arange(m)
    amp = np.sum(np.exp(-2j * np.pi * idx * ((l - m_in) % m) / m) * np.sqrt(lam)) / m
    return float(abs(amp) ** 2)


def _binary_helstrom(same: bool, energy: float) -> float:
    """Two-state PSK Helstrom probability at per-state energy ``energy``
    (states ±√ℰ): the M = 2 specialisation of `psk_helstrom_prob`."""
    root = math.sqrt(max(1.0 - math.exp(-4.0 * energy), 0.0))
    return 0.5 * (1.0 + root) if same else 0.5 * (1.0 - root)


def _quad(fun, lo: float, hi: float) -> float:
    val, err = integrate.quad(fun, lo, hi, epsabs=QUAD_TOL, epsrel=1e-10, limit=300)
    if err > 1e-8:
        raise ConvergenceError(
            f"adaptive quadrature error estimate {err:.2e} exceeds tolerance"
        )
    return val


_SWAP_3 = {0: 0, 1: 2, 2: 1}
_SWAP_4 = {0: 0, 1: 3, 2: 2, 3: 1}


def _real3(l: int, m_in: int, energy: float) -> float:
    if m_in == 0:
        return 1.0 if l == 0 else 0.0
    if m_in == 2:  # symmetry 1 <-> 2
        return _real3(_SWAP_3[l], 1, energy)
    e3 = 3.0 * energy  # |α_1 − α_0|² = |α_1 − α_2|² = 3ℰ
    if l == 0:
        return math.exp(-e3)
    if energy == 0.0:
        return 0.0
    same = l == 1
    return _quad(
        lambda x: math.exp(-x) * _binary_helstrom(same, 0.5 * (e3 - x)), 0.0, e3
    )


def _real4(l: int, m_in: int, energy: float) -> float:
    if m_in == 0:
        return 1.0 if l == 0 else 0.0
    e2, e4 = 2.0 * energy, 4.0 * energy
    if m_in == 2:  # nulling α_0 then α_2 never confuses 2 with 1 or 3
        return {0: math.exp(-e4), 2: 1.0 - math.exp(-e4)}.get(l, 0.0)
    if m_in == 3:  # symmetry 1 <-> 3
        return _real4(_SWAP_4[l], 1, energy)
    if l == 0:
        return math.exp(-e2)
    if l == 2:
        return e2 * math.exp(-e2)
    if energy == 0.0:
        return 0.0
    # P(1|1): click past both nulling stages then binary discrimination of
    # α_1 vs α_3 with the residual energy.  The printed double integral over
    # (t, t') depends on the inner state only through s = −ln(t·t'), which
    # collapses it to ∫₀^{2ℰ} x·e^{−x}·P_hel⁽²⁾(1|1; (4ℰ−2x)/2) dx.
    p11 = _quad(
        lambda x: x * math.exp(-x) * _binary_helstrom(True, 0.5 * (e4 - 2.0 * x)),
        0.0,
        e2,
    )
    if l == 1:
        return p11
    return max(1.0 - math.exp(-e2) - e2 * math.exp(-e2) - p11, 0.0)


def realistic_psk(l: int, m_in: int, m: int, energy: float) -> float:
    """Sequential-nulling cascade probability P(ℓ|m) for M ∈ {3, 4} PSK states.

    Stage one nulls α₀ with a displaced on-off detector in the infinite
    splitting-step limit; a click hands the residual energy to the next stage
    (Dolinar for the final pair, nulling the equidistant α₂ first for M = 4).
    """
    if m not in (3, 4):
        raise ValueError(f"realistic cascade defined for M in {{3, 4}}, got {m}")
    if not (0 <= l < m and 0 <= m_in < m):
        raise ValueError("phase indices must lie in range(M)")
    if energy < 0:
        raise ValueError("energy must be non-negative")
    return _real3(l, m_in, energy) if m == 3 else _real4(l, m_in, energy)


@dataclass(frozen=True)
class DetectionKernel:
    """Single-mode M-PSK detection kernel: ``kind`` is "helstrom" (optimal)
    or "realistic" (nulling cascade, M ∈ {3, 4})."""

    kind: str
    m: int

    def __post_init__(self) -> None:
        if self.kind not in ("helstrom", "realistic"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "realistic" and self.m not in (3, 4):
            raise ValueError("realistic kernel requires M in {3, 4}")
        if self.m < 1:
            raise ValueError("need at least one phase")

    def prob(self, l: int, m_in: int, energy: float) -> float:
        if self.kind == "helstrom":
            return psk_helstrom_prob(l, m_in, self.m, energy)
        return realistic_psk(l, m_in, self.m, energy)

    def matrix(self, energy: float) -> np.ndarray:
        """Conditional matrix P[ℓ, m]; columns sum to ≤ 1 (= 1 for helstrom)."""
        return np.array(
            [[self.prob(l, mm, energy) for mm in range(self.m)] for l in range(self.m)]
        )


def _as_kernel(kernel: str | DetectionKernel, m: int) -> DetectionKernel:
    if isinstance(kernel, DetectionKernel):
        if kernel.m != m:
            raise ValueError("kernel phase count does not match M")
        return kernel
    return DetectionKernel(kernel, m)


def vp_vacuum_prob(energy: float) -> float:
    """Probability that vacuum-or-pulse detection never clicks on a pulse of
    the given energy (the pulse is then mistaken for the vacuum)."""
    return math.exp(-energy)


def vp_prob(
    l: int,
    m_in: int,
    m: int,
    energy: float,
    j_steps: int | float | None = None,
    kernel: str | DetectionKernel = "helstrom",
) -> float:
    """Vacuum-or-pulse probability of identifying phase ℓ given pulse phase m_in.

    The pulse of energy ℰ is split J ways; the first click at step j triggers
    PSK detection on the remaining energy ℰ(J−j)/J.  ``j_steps=None`` (or inf)
    takes the infinite-splitting limit ∫_{e^{−ℰ}}^{1} P_psk(ℓ|m; ℰ+ln t) dt.
    """
    kern = _as_kernel(kernel, m)
    e_tot = float(energy)
    if e_tot < 0:
        raise ValueError("energy must be non-negative")
    if e_tot == 0.0:
        return 0.0
    if j_steps is None or j_steps == math.inf:
        # ∫_{e^{−ℰ}}^{1} P(ℰ+ln t) dt rewritten with t = e^{−x}; the e^{−x}
        # weight keeps the integrand well-scaled even for large pulse energies
        return _quad(lambda x: math.exp(-x) * kern.prob(l, m_in, e_tot - x), 0.0, e_tot)
    j_steps = int(j_steps)
    if j_steps < 1:
        raise ValueError("need at least one splitting step")
    step = e_tot / j_steps
    total = 0.0
    for j in range(1, j_steps + 1):
        # no click in the first j-1 steps, click at step j, PSK on the rest;
        # click probabilities then sum to exactly 1 - exp(-energy)
        total += math.exp(-step * (j - 1)) * (1.0 - math.exp(-step)) * kern.prob(
            l, m_in, step * (j_steps - j)
        )
    return total


def _vp_matrix(
    m: int,
    energy: float,
    j_steps: int | float | None,
    kernel: str | DetectionKernel,
) -> np.ndarray:
    """M×M matrix P_vp[ℓ, m] of vacuum-or-pulse phase identifications."""
    kern = _as_kernel(kernel, m)
    out = np.empty((m, m))
    if kern.kind == "helstrom":
        # circulant: depends on (ℓ − m) mod M only
        col = [vp_prob(l, 0, m, energy, j_steps, kern) for l in range(m)]
        for mm in range(m):
            for l in range(m):
                out[l, mm] = col[(l - mm) % m]
        return out
    for mm in range(m):
        for l in range(m):
            out[l, mm] = vp_prob(l, mm, m, energy, j_steps, kern)
    return out


def _receiver_rate(cond: np.ndarray, miss: float, m: int, n: int) -> float:
    """Rate (bits per mode) of the N-mode PPM receiver from the M×M phase
    matrix ``cond`` and the no-click probability ``miss`` (the err outcome).

    Equals I(X:Y)/N for X = (mode, phase) uniform on NM values and
    Y = X ∪ {err}; the err outcome is input-independent and carries no
    information, and outcomes on the wrong mode have probability zero.
    """
    rate = 0.0
    for l in range(m):
        row_sum = float(np.sum(cond[l, :]))
        if row_sum <= 0.0:
            continue
        for mx in range(m):
            p = float(cond[l, mx])
            if p > 0.0:
                rate += p / (m * n) * math.log2(m * n * p / row_sum)
    return rate


def had_rate(
    n: int,
    m: int,
    energy_per_mode: float,
    kernel: str | DetectionKernel = "helstrom",
    j_steps: int | float | None = None,
) -> float:
    """Rate (bits per mode) of the PSK Hadamard receiver: vacuum-or-pulse
    detection on each PPM mode with the given PSK kernel on clicks."""
    _require_power_of_two(n)
    e_tot = n * float(energy_per_mode)
    if e_tot == 0.0:
        return 0.0
    cond = _vp_matrix(m, e_tot, j_steps, kernel)
    return _receiver_rate(cond, vp_vacuum_prob(e_tot), m, n)


def separable_rate(m: int, energy_per_mode: float, kernel: str | DetectionKernel = "helstrom") -> float:
    """Rate of the separable PSK scheme: one of M symmetric coherent states on
    each mode, read out with the given single-mode kernel."""
    e = float(energy_per_mode)
    if e == 0.0:
        return 0.0
    kern = _as_kernel(kernel, m)
    cond = kern.matrix(e)
    rate = 0.0
    for l in range(m):
        row_sum = float(np.sum(cond[l, :]))
        if row_sum <= 0.0:
            continue
        for mx in range(m):
            p = float(cond[l, mx])
            if p > 0.0:
                rate += p / m * math.log2(m * p / row_sum)
    return rate


def envelope(
    n_values,
    m: int,
    energy_per_mode: float,
    kernel: str | DetectionKernel = "helstrom",
    j_steps: int | float | None = None,
) -> float:
    """max_N had_rate(N, M, E) over the given code lengths."""
    n_values = list(n_values)
    if not n_values:
        raise ValueError("need at least one code length")
    return max(had_rate(n, m, energy_per_mode, kernel, j_steps) for n in n_values)
