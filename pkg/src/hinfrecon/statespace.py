"""State-space models for continuous- and discrete-time LTI systems.

Dense, immutable representations plus the handful of kernels everything
else is built on: matrix exponential, zero-order-hold discretization,
interconnection (series / parallel), time simulation and pointwise
frequency response.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ContinuousStateSpace",
    "DiscreteStateSpace",
    "SignalGrid",
    "FirFilter",
    "ResolventSingularError",
    "expm",
    "c2d_zoh",
    "series",
    "cseries",
    "parallel",
    "simulate",
    "frequency_response",
    "fir_to_statespace",
]

# Systems with spectral radius inside this band around 1 are classified
# neither stable nor unstable; synthesis rejects them.
STABILITY_TOL = 1e-9

_STEP_RTOL = 1e-9


class ResolventSingularError(ValueError):
    """Frequency-response evaluation hit a (near-)singular resolvent."""

    def __init__(self, theta, cond):
        self.theta = theta
        self.cond = cond
        super().__init__(
            f"resolvent singular at theta={theta!r} "
            f"(condition estimate {cond:.3e}); the evaluation point is a pole"
        )


def _as_matrix(value, name="matrix"):
    m = np.array(value, dtype=float)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if m.size and not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    m.setflags(write=False)
    return m


def _check_shapes(A, B, C, D):
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"A must be square, got {A.shape}")
    if B.shape[0] != n:
        raise ValueError(f"B has {B.shape[0]} rows, expected {n}")
    if C.shape[1] != n:
        raise ValueError(f"C has {C.shape[1]} columns, expected {n}")
    if D.shape != (C.shape[0], B.shape[1]):
        raise ValueError(
            f"D must be {C.shape[0]}x{B.shape[1]}, got {D.shape}"
        )


def _steps_match(a, b):
    return math.isclose(a, b, rel_tol=_STEP_RTOL, abs_tol=0.0)


@dataclass(frozen=True)
class ContinuousStateSpace:
    """Continuous-time LTI model dx/dt = Ax + Bu, y = Cx + Du."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", _as_matrix(self.A, "A"))
        object.__setattr__(self, "B", _as_matrix(self.B, "B"))
        object.__setattr__(self, "C", _as_matrix(self.C, "C"))
        object.__setattr__(self, "D", _as_matrix(self.D, "D"))
        _check_shapes(self.A, self.B, self.C, self.D)

    @property
    def order(self):
        return self.A.shape[0]

    @property
    def in_dim(self):
        return self.B.shape[1]

    @property
    def out_dim(self):
        return self.C.shape[0]

    @property
    def strictly_proper(self):
        return not np.any(self.D)

    def poles(self):
        if self.order == 0:
            return np.zeros(0, dtype=complex)
        return np.linalg.eigvals(self.A)

    @property
    def is_stable(self):
        """All poles strictly in the open left half-plane (with tolerance)."""
        if self.order == 0:
            return True
        return bool(np.max(self.poles().real) < -STABILITY_TOL)

    @staticmethod
    def gain(value):
        """Static continuous system y = value * u (scalar or matrix)."""
        D = _as_matrix(value, "gain")
        p, m = D.shape
        z = np.zeros((0, 0))
        return ContinuousStateSpace(z, np.zeros((0, m)), np.zeros((p, 0)), D)


@dataclass(frozen=True)
class DiscreteStateSpace:
    """Discrete-time LTI model x+ = Ax + Bu, y = Cx + Du at a fixed step."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    step: float

    def __post_init__(self):
        object.__setattr__(self, "A", _as_matrix(self.A, "A"))
        object.__setattr__(self, "B", _as_matrix(self.B, "B"))
        object.__setattr__(self, "C", _as_matrix(self.C, "C"))
        object.__setattr__(self, "D", _as_matrix(self.D, "D"))
        _check_shapes(self.A, self.B, self.C, self.D)
        if not (self.step > 0):
            raise ValueError(f"step must be positive, got {self.step}")

    @property
    def order(self):
        return self.A.shape[0]

    @property
    def in_dim(self):
        return self.B.shape[1]

    @property
    def out_dim(self):
        return self.C.shape[0]

    def spectral_radius(self):
        if self.order == 0:
            return 0.0
        return float(np.max(np.abs(np.linalg.eigvals(self.A))))

    def stability(self):
        """Classify as 'stable', 'marginal' or 'unstable'.

        The marginal band is ``[1 - STABILITY_TOL, 1 + STABILITY_TOL]`` on
        the spectral radius; marginal systems are rejected by synthesis.
        """
        rho = self.spectral_radius()
        if rho < 1.0 - STABILITY_TOL:
            return "stable"
        if rho <= 1.0 + STABILITY_TOL:
            return "marginal"
        return "unstable"

    @property
    def is_stable(self):
        return self.stability() == "stable"

    @staticmethod
    def gain(value, step):
        """Static discrete system y = value * u."""
        D = _as_matrix(value, "gain")
        p, m = D.shape
        z = np.zeros((0, 0))
        return DiscreteStateSpace(z, np.zeros((0, m)), np.zeros((p, 0)), D, step)

    @staticmethod
    def identity(dim, step):
        return DiscreteStateSpace.gain(np.eye(dim), step)


@dataclass(frozen=True)
class SignalGrid:
    """Uniformly sampled vector signal: values[k] lives at start_time + k*step."""

    step: float
    values: np.ndarray
    start_time: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v.reshape(-1, 1)
        if v.ndim != 2:
            raise ValueError(f"values must be 1- or 2-dimensional, got {v.ndim}")
        if v.size and not np.all(np.isfinite(v)):
            raise ValueError("signal contains non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if not (self.step > 0):
            raise ValueError(f"step must be positive, got {self.step}")

    def __len__(self):
        return self.values.shape[0]

    @property
    def dim(self):
        return self.values.shape[1]

    def times(self):
        return self.start_time + self.step * np.arange(len(self))

    def scalar(self):
        if self.dim != 1:
            raise ValueError(f"signal has dimension {self.dim}, expected 1")
        return self.values[:, 0]


@dataclass(frozen=True)
class FirFilter:
    """Causal FIR filter y[k] = sum_n taps[n] * u[k-n] at period `period`."""

    taps: np.ndarray
    period: float

    def __post_init__(self):
        t = np.atleast_1d(np.array(self.taps, dtype=float))
        if t.ndim != 1 or t.size == 0:
            raise ValueError("taps must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(t)):
            raise ValueError("taps contain non-finite entries")
        t.setflags(write=False)
        object.__setattr__(self, "taps", t)
        if not (self.period > 0):
            raise ValueError(f"period must be positive, got {self.period}")

    @property
    def num_taps(self):
        return self.taps.size

    def response(self, theta):
        """Frequency response sum_n taps[n] e^{-j n theta}."""
        theta = np.asarray(theta, dtype=float)
        n = np.arange(self.num_taps)
        return np.exp(-1j * np.multiply.outer(theta, n)) @ self.taps

    def apply(self, u):
        """Causal filtering of a 1-d sequence (zero initial history)."""
        u = np.asarray(u, dtype=float)
        full = np.convolve(u, self.taps)
        return full[: u.size]


def fir_to_statespace(fir):
    """Shift-register realization of a causal FIR filter."""
    a = fir.taps
    M = a.size - 1
    A = np.eye(M, k=-1)
    B = np.zeros((M, 1))
    if M:
        B[0, 0] = 1.0
    C = a[1:].reshape(1, M)
    D = np.array([[a[0]]])
    return DiscreteStateSpace(A, B, C, D, fir.period)


# Diagonal Pade order-13 coefficients for the matrix exponential.
_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_PADE13_THETA = 4.25


def expm(M):
    """Matrix exponential by scaling-and-squaring with a Pade order-13 core."""
    M = _as_matrix(M, "M")
    n = M.shape[0]
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"expm needs a square matrix, got {M.shape}")
    if n == 0:
        return np.zeros((0, 0))

    norm = np.linalg.norm(M, 1)
    if norm == 0.0:
        return np.eye(n)
    s = 0
    if norm > _PADE13_THETA:
        s = int(math.ceil(math.log2(norm / _PADE13_THETA)))
    A = M / (2.0 ** s)

    b = _PADE13
    I = np.eye(n)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A2 @ A4
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I)
    X = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        X = X @ X
    return X


def c2d_zoh(sys, step):
    """Zero-order-hold discretization of a continuous system.

    Ad = e^{A step}, Bd = (integral_0^step e^{A tau} dtau) B, both obtained
    from one exponential of the augmented block matrix [[A, B], [0, 0]].
    C and D are carried through unchanged.
    """
    if not (step > 0):
        raise ValueError(f"step must be positive, got {step}")
    n = sys.order
    m = sys.in_dim
    blk = np.zeros((n + m, n + m))
    blk[:n, :n] = sys.A
    blk[:n, n:] = sys.B
    E = expm(blk * step)
    Ad = E[:n, :n]
    Bd = E[:n, n:]
    return DiscreteStateSpace(Ad, Bd, sys.C, sys.D, step)


def _series_matrices(s1, s2):
    n1, n2 = s1.order, s2.order
    A = np.zeros((n1 + n2, n1 + n2))
    A[:n1, :n1] = s1.A
    A[n1:, n1:] = s2.A
    A[n1:, :n1] = s2.B @ s1.C
    B = np.vstack([s1.B, s2.B @ s1.D])
    C = np.hstack([s2.D @ s1.C, s2.C])
    D = s2.D @ s1.D
    return A, B, C, D


def series(first, second):
    """Composition second o first of two discrete systems (same step)."""
    if first.out_dim != second.in_dim:
        raise ValueError(
            f"series: first has {first.out_dim} outputs but "
            f"second expects {second.in_dim} inputs"
        )
    if not _steps_match(first.step, second.step):
        raise ValueError(
            f"series: step mismatch {first.step!r} vs {second.step!r}"
        )
    A, B, C, D = _series_matrices(first, second)
    return DiscreteStateSpace(A, B, C, D, first.step)


def cseries(first, second):
    """Composition second o first of two continuous systems."""
    if first.out_dim != second.in_dim:
        raise ValueError(
            f"cseries: first has {first.out_dim} outputs but "
            f"second expects {second.in_dim} inputs"
        )
    A, B, C, D = _series_matrices(first, second)
    return ContinuousStateSpace(A, B, C, D)


def parallel(s1, s2):
    """Sum of two discrete systems sharing input and output dimensions."""
    if (s1.in_dim, s1.out_dim) != (s2.in_dim, s2.out_dim):
        raise ValueError("parallel: input/output dimensions differ")
    if not _steps_match(s1.step, s2.step):
        raise ValueError(f"parallel: step mismatch {s1.step!r} vs {s2.step!r}")
    n1, n2 = s1.order, s2.order
    A = np.zeros((n1 + n2, n1 + n2))
    A[:n1, :n1] = s1.A
    A[n1:, n1:] = s2.A
    B = np.vstack([s1.B, s2.B])
    C = np.hstack([s1.C, s2.C])
    D = s1.D + s2.D
    return DiscreteStateSpace(A, B, C, D, s1.step)


def simulate(sys, input_grid, x0=None):
    """Run the state recursion over an input grid; returns the output grid."""
    if input_grid.dim != sys.in_dim:
        raise ValueError(
            f"input dimension {input_grid.dim} != system in_dim {sys.in_dim}"
        )
    if not _steps_match(input_grid.step, sys.step):
        raise ValueError(
            f"input step {input_grid.step!r} != system step {sys.step!r}"
        )
    n = sys.order
    if x0 is None:
        x = np.zeros(n)
    else:
        x = np.array(x0, dtype=float).reshape(n)
    u = input_grid.values
    T = u.shape[0]
    y = np.empty((T, sys.out_dim))
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    for k in range(T):
        y[k] = C @ x + D @ u[k]
        x = A @ x + B @ u[k]
    return SignalGrid(step=sys.step, values=y, start_time=input_grid.start_time)


def frequency_response(sys, theta):
    """Transfer matrix C (e^{j theta} I - A)^{-1} B + D at one frequency."""
    n = sys.order
    z = np.exp(1j * float(theta))
    if n == 0:
        return sys.D.astype(complex)
    M = z * np.eye(n) - sys.A
    try:
        X = np.linalg.solve(M, sys.B.astype(complex))
    except np.linalg.LinAlgError:
        raise ResolventSingularError(theta, np.inf) from None
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e14:
        raise ResolventSingularError(theta, float(cond))
    return sys.C @ X + sys.D


def frequency_response_many(sys, thetas):
    """Batched frequency response; returns an array (len(thetas), p, m)."""
    thetas = np.asarray(thetas, dtype=float)
    n = sys.order
    z = np.exp(1j * thetas)
    if n == 0:
        return np.broadcast_to(
            sys.D.astype(complex), (thetas.size,) + sys.D.shape
        ).copy()
    I = np.eye(n)
    M = z[:, None, None] * I - sys.A
    X = np.linalg.solve(M, np.broadcast_to(
        sys.B.astype(complex), (thetas.size,) + sys.B.shape))
    return sys.C @ X + sys.D
