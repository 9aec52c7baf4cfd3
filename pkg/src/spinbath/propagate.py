"""Random and thermal pure states, real and imaginary time propagation.

A canonical thermal pure state at inverse temperature beta is

    |psi_beta> = exp(-beta H / 2) |psi_0> / <psi_0| exp(-beta H) |psi_0>^(1/2)

with |psi_0> drawn uniformly from the unit sphere (complex Gaussian
amplitudes via Box-Muller).  Both exp(-beta H / 2) and exp(-i t H) are
applied matrix-free through a Chebyshev expansion of the exponential over
the affinely rescaled spectrum, with an exact-diagonalization path for
small dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ive, jv

from .errors import ChebyshevOrderError, DimensionError, ModelError, SizeLimitError
from .hamiltonian import ENVIRONMENT, FULL, SpinModel, apply_hamiltonian, energy_bounds
from .seeds import spawn_rng
from .spectrum import DEFAULT_DIM_CAP, SpectrumSummary, diagonalize

DEFAULT_TOLERANCE = 1e-15      # relative truncation threshold for coefficients
DEFAULT_MAX_ORDER = 200_000
EXACT_DIM_DEFAULT = 2**12      # "auto" method prefers exact below this


def _sub_seed(seed, *extra) -> tuple:
    return (*(seed if isinstance(seed, tuple) else (seed,)), *extra)


def random_state(dim: int, seed) -> np.ndarray:
    """Haar-random state: Box-Muller Gaussian amplitudes, normalized.

    ``seed`` may be an int or a tuple of ints/strings; the draw is
    deterministic per seed (Philox stream).
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = spawn_rng(*(seed if isinstance(seed, tuple) else (seed,)))
    u = rng.random((2, dim))
    radius = np.sqrt(-2.0 * np.log1p(-u[0]))   # 1 - u in (0, 1], so log is finite
    d = radius * np.cos(2.0 * np.pi * u[1]) + 1j * radius * np.sin(2.0 * np.pi * u[1])
    return d / np.linalg.norm(d)


@dataclass(frozen=True)
class ThermalStateRequest:
    """How to prepare a canonical thermal state.

    method: "exact" (dense eigendecomposition), "chebyshev", or "auto"
    (exact when the dimension is small or a spectrum is supplied).
    """

    beta: float
    seed: object
    method: str = "auto"

    def __post_init__(self):
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ValueError("beta must be finite and >= 0")
        if self.method not in ("auto", "exact", "chebyshev"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class ChebyshevPlan:
    """Retained expansion coefficients for one propagator.

    kind "real" expands exp(-i t H), kind "imag" expands exp(-beta H / 2);
    the spectrum is mapped onto [-1, 1] via (e_min, e_max).  ``coefficients``
    carry the full term weights (2 - delta_k0 and the i^k / sign factors);
    the scalar prefactor exp(log_prefactor) * phase is applied at the end.
    """

    e_min: float
    e_max: float
    order: int
    coefficients: np.ndarray
    tolerance: float
    kind: str
    parameter: float
    log_prefactor: float = 0.0
    phase: complex = 1.0 + 0j

    def __post_init__(self):
        if self.e_max <= self.e_min:
            raise ValueError("need e_max > e_min")
        if self.order < 1:
            raise ValueError("order must be >= 1")


def _pad_bounds(bounds):
    e_min, e_max = float(bounds[0]), float(bounds[1])
    if e_max <= e_min:
        # zero-width spectrum (e.g. empty bond lists); widen so the affine
        # map is defined, the expansion then reduces to the exact scalar
        e_min, e_max = e_min - 0.5, e_max + 0.5
    return e_min, e_max


def _truncate(coeffs: np.ndarray, tolerance: float):
    """Index of the last retained coefficient under the two-in-a-row rule."""
    mags = np.abs(coeffs)
    thr = tolerance * mags.max()
    small = mags < thr
    for k in range(1, len(coeffs) - 1):
        if small[k] and small[k + 1]:
            return k
    return None


def real_time_plan(bounds, t, tolerance=DEFAULT_TOLERANCE, max_order=DEFAULT_MAX_ORDER):
    """Plan for exp(-i t H) with spectrum inside ``bounds``."""
    e_min, e_max = _pad_bounds(bounds)
    a = 0.5 * (e_max + e_min)
    half = 0.5 * (e_max - e_min)
    z = t * half
    n = int(abs(z) + 20 + 12 * abs(z) ** (1.0 / 3.0))
    while True:
        k = np.arange(n + 2)
        bessel = jv(k, z)
        coeffs = np.where(k == 0, 1.0, 2.0) * (-1j) ** k * bessel
        order = _truncate(coeffs, tolerance)
        if order is not None:
            break
        if n > max_order:
            order = None
            break
        n = int(n * 1.6) + 16
    if order is None or order > max_order:
        raise ChebyshevOrderError(
            f"exp(-itH) expansion needs order > {max_order} for t*width = {2 * z:.3g}; "
            "raise max_order"
        )
    return ChebyshevPlan(
        e_min, e_max, order, coeffs[: order + 1], tolerance,
        kind="real", parameter=float(t), phase=np.exp(-1j * t * a),
    )


def imaginary_time_plan(bounds, beta, tolerance=DEFAULT_TOLERANCE, max_order=DEFAULT_MAX_ORDER):
    """Plan for exp(-beta H / 2) with spectrum inside ``bounds``."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    e_min, e_max = _pad_bounds(bounds)
    a = 0.5 * (e_max + e_min)
    half = 0.5 * (e_max - e_min)
    z = 0.5 * beta * half
    n = int(z + 20 + 9 * np.sqrt(z))
    while True:
        k = np.arange(n + 2)
        # scaled modified Bessel ive(k, z) = I_k(z) exp(-z) avoids overflow;
        # the missing exp(z) joins the prefactor in the log domain
        bessel = ive(k, z)
        coeffs = np.where(k == 0, 1.0, 2.0) * (-1.0) ** k * bessel
        order = _truncate(coeffs, tolerance)
        if order is not None:
            break
        if n > max_order:
            order = None
            break
        n = int(n * 1.6) + 16
    if order is None or order > max_order:
        raise ChebyshevOrderError(
            f"exp(-bH/2) expansion needs order > {max_order} for beta*width = "
            f"{beta * (e_max - e_min):.3g}; raise max_order"
        )
    return ChebyshevPlan(
        e_min, e_max, order, coeffs[: order + 1], tolerance,
        kind="imag", parameter=float(beta), log_prefactor=z - 0.5 * beta * a,
    )


def _apply_plan(model: SpinModel, plan: ChebyshevPlan, state: np.ndarray) -> np.ndarray:
    """Clenshaw-free forward recurrence sum_k c_k T_k(X) |state>."""
    if state.shape[0] != model.dim:
        raise DimensionError(f"state dimension {state.shape[0]} != model dimension {model.dim}")
    a = 0.5 * (plan.e_max + plan.e_min)
    half = 0.5 * (plan.e_max - plan.e_min)

    def x_apply(v):
        return (apply_hamiltonian(model, FULL, v) - a * v) / half

    c = plan.coefficients
    t_prev = state.astype(complex)
    acc = c[0] * t_prev
    if plan.order >= 1:
        t_cur = x_apply(t_prev)
        acc += c[1] * t_cur
        for k in range(2, plan.order + 1):
            t_next = 2.0 * x_apply(t_cur) - t_prev
            acc += c[k] * t_next
            t_prev, t_cur = t_cur, t_next
    return acc


def evolve_real_time(model: SpinModel, state: np.ndarray, t: float, plan=None,
                     tolerance=DEFAULT_TOLERANCE, max_order=DEFAULT_MAX_ORDER) -> np.ndarray:
    """Return exp(-i t H) |state| via the Chebyshev expansion (norm preserving).

    A cached ``plan`` built by real_time_plan for the same t may be supplied
    to avoid recomputing coefficients (e.g. when stepping a time trace).
    """
    if plan is None:
        plan = real_time_plan(energy_bounds(model), t, tolerance, max_order)
    return plan.phase * _apply_plan(model, plan, state)


def project_imaginary_time(model: SpinModel, state: np.ndarray, beta: float, plan=None,
                           tolerance=DEFAULT_TOLERANCE, max_order=DEFAULT_MAX_ORDER):
    """Apply exp(-beta H / 2) and normalize.

    Returns (normalized state, squared pre-normalization norm).  For a unit
    input the second value is <state| exp(-beta H) |state>; it may overflow
    to inf (or underflow to 0) at extreme beta * |E|, while the returned
    state itself is computed stably.
    """
    if plan is None:
        plan = imaginary_time_plan(energy_bounds(model), beta, tolerance, max_order)
    raw = _apply_plan(model, plan, state)
    raw_norm = np.linalg.norm(raw)
    # The scaled series sums to exp(-z(x - x_min)) profiles with terms of
    # order one; once the surviving amplitude falls near machine epsilon the
    # single-shot projection has cancelled away all precision.
    if not raw_norm > 1e-12 * np.linalg.norm(state):
        raise ChebyshevOrderError(
            "beta * spectral width too large for a single double-precision "
            "Chebyshev projection; use method='exact' or compose shorter "
            "imaginary-time projections"
        )
    with np.errstate(over="ignore", under="ignore"):
        norm_sq = float(np.exp(2.0 * (np.log(raw_norm) + plan.log_prefactor)))
    return raw / raw_norm, norm_sq


def real_matmul(m: np.ndarray, x: np.ndarray) -> np.ndarray:
    """m @ x without upcasting a real matrix to complex (two real products).

    The real and imaginary parts are copied contiguously so both products
    stay on the BLAS fast path.
    """
    if np.iscomplexobj(x) and not np.iscomplexobj(m):
        re = m @ np.ascontiguousarray(x.real)
        im = m @ np.ascontiguousarray(x.imag)
        return re + 1j * im
    return m @ x


def _exact_project(spectrum: SpectrumSummary, state: np.ndarray, beta: float):
    if spectrum.eigenvectors is None:
        raise ValueError("exact method needs a spectrum with eigenvectors")
    e = spectrum.eigenvalues
    v = spectrum.eigenvectors
    coeff = real_matmul(v.conj().T, state)
    coeff *= np.exp(-0.5 * beta * (e - e[0]))
    raw = real_matmul(v, coeff)
    raw_norm = np.linalg.norm(raw)
    with np.errstate(over="ignore", under="ignore"):
        norm_sq = float(raw_norm**2 * np.exp(-beta * e[0]))
    return raw / raw_norm, norm_sq


def canonical_thermal_state(model: SpinModel, request: ThermalStateRequest,
                            spectrum: SpectrumSummary | None = None,
                            exact_dim_cap: int = EXACT_DIM_DEFAULT,
                            max_order: int = DEFAULT_MAX_ORDER):
    """Draw |psi_0> per the request seed and project to inverse temperature beta.

    Returns (state, norm_sq) with norm_sq = <psi_0| exp(-beta H) |psi_0>.
    beta = 0 returns |psi_0> itself.  Method "exact" diagonalizes the full
    Hamiltonian once (pass ``spectrum`` to reuse it across realizations);
    "chebyshev" never builds a dense matrix.
    """
    psi0 = random_state(model.dim, request.seed)
    if request.beta == 0.0:
        return psi0, 1.0
    method = request.method
    if method == "auto":
        if spectrum is not None or model.dim <= exact_dim_cap:
            method = "exact"
        else:
            method = "chebyshev"
    if method == "exact":
        if spectrum is None:
            if model.dim > DEFAULT_DIM_CAP:
                raise SizeLimitError(
                    f"dimension {model.dim} too large for the exact method"
                )
            spectrum = diagonalize(model, FULL)
        return _exact_project(spectrum, psi0, request.beta)
    return project_imaginary_time(model, psi0, request.beta, max_order=max_order)


def alternating_product_state(model: SpinModel, beta: float, seed) -> np.ndarray:
    """Product initial state: system up-down-up-... , environment thermal.

    The system factor is the basis state with site 1 up, site 2 down and so
    on; the environment factor is a canonical thermal state of H_E alone at
    inverse temperature beta (drawn per seed).  This is the relaxation
    starting point used alongside canonical thermal states of the entirety.
    """
    if model.n_env < 1:
        raise ModelError("product state needs an environment")
    sys_index = 0
    for site in range(2, model.n_system + 1, 2):
        sys_index |= 1 << (site - 1)
    sys_vec = np.zeros(model.dim_system, dtype=complex)
    sys_vec[sys_index] = 1.0
    env_spec = diagonalize(model, ENVIRONMENT)
    env0 = random_state(model.dim_env, seed)
    env_vec, _ = _exact_project(env_spec, env0, beta)
    return np.kron(env_vec, sys_vec)


def normalization_diagnostic(model: SpinModel, beta: float, n_realizations: int, seed) -> np.ndarray:
    """Per-realization | sum_k |d_k|^2 p_k - 1/D | for an uncoupled model.

    p_k are exact Boltzmann weights assembled from the part spectra
    (p_i^S * p_p^E); d are the random-state amplitudes in the product
    eigenbasis.  Exact zero (up to rounding) at beta = 0; the spread shrinks
    with growing D.
    """
    if model.coupling_bonds and model.lam != 0.0:
        raise ModelError("normalization diagnostic is defined for uncoupled models (lam = 0)")
    if model.dim > DEFAULT_DIM_CAP:
        raise SizeLimitError(f"dimension {model.dim} exceeds {DEFAULT_DIM_CAP}")
    es = diagonalize(model, "S", want_vectors=False).eigenvalues
    ee = diagonalize(model, "E", want_vectors=False).eigenvalues
    ws = np.exp(-beta * (es - es.min()))
    we = np.exp(-beta * (ee - ee.min()))
    p = np.kron(we / we.sum(), ws / ws.sum())     # index n = s + dim_S * e
    d = 1.0 / model.dim
    diffs = np.empty(n_realizations)
    for r in range(n_realizations):
        amp = random_state(model.dim, _sub_seed(seed, "norm-diag", r))
        diffs[r] = abs(float(np.sum(np.abs(amp) ** 2 * p)) - d)
    return diffs


@dataclass
class MomentCheck:
    """Sample moments of |d_k|^2 for random states against the exact values."""

    dim: int
    n_draws: int
    mean_x: float
    stderr_x: float
    mean_x2: float
    stderr_x2: float
    mean_xx: float
    stderr_xx: float
    ref_x: float = field(init=False)
    ref_x2: float = field(init=False)
    ref_xx: float = field(init=False)

    def __post_init__(self):
        d = self.dim
        self.ref_x = 1.0 / d
        self.ref_x2 = 2.0 / (d * (d + 1))
        self.ref_xx = 1.0 / (d * (d + 1))

    def deviations(self) -> tuple[float, float, float]:
        """|estimate - reference| in units of the standard error."""
        return (
            abs(self.mean_x - self.ref_x) / self.stderr_x,
            abs(self.mean_x2 - self.ref_x2) / self.stderr_x2,
            abs(self.mean_xx - self.ref_xx) / self.stderr_xx,
        )


def moment_check(dim: int, n_draws: int, seed) -> MomentCheck:
    """Estimate E(x), E(x^2), E(x_i x_j) over random-state draws.

    x_k = |d_k|^2.  Per draw: x of the first amplitude, the average of x^2
    over k, and the average of x_i x_j over ordered pairs i != j (computed
    from the normalization constraint).  Standard errors are over draws.
    """
    if n_draws < 2:
        raise ValueError("need at least 2 draws")
    a = np.empty(n_draws)
    b = np.empty(n_draws)
    c = np.empty(n_draws)
    for r in range(n_draws):
        x = np.abs(random_state(dim, _sub_seed(seed, "moments", r))) ** 2
        a[r] = x[0]
        sum_x2 = float(np.sum(x * x))
        b[r] = sum_x2 / dim
        c[r] = (1.0 - sum_x2) / (dim * (dim - 1)) if dim > 1 else 0.0
    se = lambda v: float(np.std(v, ddof=1) / np.sqrt(n_draws))
    return MomentCheck(dim, n_draws, float(a.mean()), se(a), float(b.mean()), se(b),
                       float(c.mean()), se(c))
