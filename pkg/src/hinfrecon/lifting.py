"""Fast discretization and blocking of the sampled-data reconstruction error.

The continuous error system (delayed signal minus its reconstruction by a
slow-rate digital filter between acquisition and hold hardware) is
discretized at the fast step h/N and blocked into a single-rate LTI system
at the slow step h.  The result splits into three fixed blocks G1, G2, G3
so that the error system with filter K is the affine map G1 + G2*K*G3.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .statespace import (
    ContinuousStateSpace,
    DiscreteStateSpace,
    FirFilter,
    c2d_zoh,
    cseries,
    fir_to_statespace,
    parallel,
    series,
)

__all__ = [
    "DesignProblem",
    "GeneralizedPlant",
    "lift",
    "delay_line",
    "build_generalized_plant",
    "close_loop",
]


@dataclass(frozen=True)
class DesignProblem:
    """Analog setup for a reconstruction filter design.

    F models the signal class (stable, strictly proper), H1 the acquisition
    filter in front of the sampler, H2 the post-filter after the hold.
    Sampling happens at period h; the error is resolved on the fast grid
    h/N; the reconstruction target is the input delayed by
    delay_steps * h / N.
    """

    F: ContinuousStateSpace
    H1: ContinuousStateSpace
    H2: ContinuousStateSpace
    h: float
    N: int
    delay_steps: int = 0

    def __post_init__(self):
        if not (self.h > 0):
            raise ValueError(f"h must be positive, got {self.h}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.delay_steps < 0:
            raise ValueError(f"delay_steps must be >= 0, got {self.delay_steps}")
        if not self.F.strictly_proper:
            raise ValueError("signal model F must be strictly proper (D = 0)")
        for name, sys in (("F", self.F), ("H1", self.H1), ("H2", self.H2)):
            if not sys.is_stable:
                raise ValueError(f"{name} must be stable")
        if self.F.in_dim != 1 or self.F.out_dim != 1:
            raise ValueError("F must be SISO")
        if self.H1.in_dim != self.F.out_dim or self.H1.out_dim != 1:
            raise ValueError("H1 must be SISO and composable with F")
        if self.H2.in_dim != 1 or self.H2.out_dim != 1:
            raise ValueError("H2 must be SISO")

    @property
    def fast_step(self):
        return self.h / self.N

    @property
    def delay_time(self):
        return self.delay_steps * self.fast_step


@dataclass(frozen=True)
class GeneralizedPlant:
    """Blocked error-system triple: error(K) = G1 + G2*K*G3 at step h.

    `problem` records the analog setup the triple came from; synthetic
    triples (tests, toy designs) may leave it as None.
    """

    G1: DiscreteStateSpace
    G2: DiscreteStateSpace
    G3: DiscreteStateSpace
    problem: DesignProblem | None = None

    def __post_init__(self):
        N = self.G1.out_dim
        if self.problem is not None and N != self.problem.N:
            raise ValueError(
                f"G1 is {N}x{self.G1.in_dim} but the problem has N = "
                f"{self.problem.N}"
            )
        if (self.G1.in_dim, self.G1.out_dim) != (N, N):
            raise ValueError("G1 must map N inputs to N outputs")
        if (self.G2.in_dim, self.G2.out_dim) != (1, N):
            raise ValueError("G2 must map 1 input to N outputs")
        if (self.G3.in_dim, self.G3.out_dim) != (N, 1):
            raise ValueError("G3 must map N inputs to 1 output")
        for name, blk in (("G1", self.G1), ("G2", self.G2), ("G3", self.G3)):
            if not np.isclose(blk.step, self.G1.step, rtol=1e-9, atol=0.0):
                raise ValueError(f"{name} step differs from G1 step")

    @property
    def N(self):
        return self.G1.out_dim

    @property
    def step(self):
        return self.G1.step


def lift(sys, N):
    """Blocked version of a discrete system: N fast steps become one sample.

    The lifted system runs at step N*step with in_dim*N inputs and
    out_dim*N outputs; driving it with blocked input reproduces exactly the
    blocked output of the fast recursion.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if N == 1:
        return sys
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    n, m, p = sys.order, sys.in_dim, sys.out_dim

    powers = [np.eye(n)]
    for _ in range(N):
        powers.append(powers[-1] @ A)

    A_L = powers[N]
    B_L = np.hstack([powers[N - 1 - j] @ B for j in range(N)])
    C_L = np.vstack([C @ powers[i] for i in range(N)])
    D_L = np.zeros((p * N, m * N))
    for i in range(N):
        D_L[p * i:p * (i + 1), m * i:m * (i + 1)] = D
        for j in range(i):
            D_L[p * i:p * (i + 1), m * j:m * (j + 1)] = C @ powers[i - j - 1] @ B
    return DiscreteStateSpace(A_L, B_L, C_L, D_L, N * sys.step)


def delay_line(m, dim, step):
    """Shift register delaying a dim-vector signal by m steps (m >= 0)."""
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    if m == 0:
        return DiscreteStateSpace.identity(dim, step)
    n = m * dim
    A = np.zeros((n, n))
    for k in range(m - 1):
        A[(k + 1) * dim:(k + 2) * dim, k * dim:(k + 1) * dim] = np.eye(dim)
    B = np.zeros((n, dim))
    B[:dim, :] = np.eye(dim)
    C = np.zeros((dim, n))
    C[:, (m - 1) * dim:] = np.eye(dim)
    D = np.zeros((dim, dim))
    return DiscreteStateSpace(A, B, C, D, step)


def _keep_first_block_row(sys, p, N):
    """Restrict a lifted system to the first of its N stacked output blocks."""
    C = sys.C[:p, :]
    D = sys.D[:p, :]
    return DiscreteStateSpace(sys.A, sys.B, C, D, sys.step)


def build_generalized_plant(problem):
    """Discretize at h/N, block, and split into the affine triple.

    G1 carries the delayed reference path (fast-held input through the
    signal model and an m-step fast delay, blocked).  G3 is the sampled
    acquisition path (signal model then acquisition filter, discretized as
    one continuous chain, keeping the sample at each block boundary).  G2
    is the hold-and-post-filter path with the error-junction minus sign
    absorbed; its single input is replicated over the N fast steps of one
    slow period by the zero-order hold.
    """
    N = problem.N
    delta = problem.fast_step

    F_d = c2d_zoh(problem.F, delta)
    chain_d = c2d_zoh(cseries(problem.F, problem.H1), delta)
    H2_d = c2d_zoh(problem.H2, delta)

    ref_fast = series(F_d, delay_line(problem.delay_steps, 1, delta))
    G1 = lift(ref_fast, N)

    G3 = _keep_first_block_row(lift(chain_d, N), 1, N)

    H2_L = lift(H2_d, N)
    ones = np.ones((N, 1))
    G2 = DiscreteStateSpace(
        H2_L.A, H2_L.B @ ones, -H2_L.C, -(H2_L.D @ ones), H2_L.step
    )
    return GeneralizedPlant(G1=G1, G2=G2, G3=G3, problem=problem)


def close_loop(plant, fir):
    """State-space realization of G1 + G2*K*G3 for an FIR filter K.

    There is no feedback path, so the result is stable whenever the three
    blocks are.
    """
    if not isinstance(fir, FirFilter):
        raise TypeError(f"expected FirFilter, got {type(fir).__name__}")
    if not np.isclose(fir.period, plant.step, rtol=1e-9, atol=0.0):
        raise ValueError(
            f"filter period {fir.period!r} != plant step {plant.step!r}"
        )
    K = fir_to_statespace(fir)
    path = series(series(plant.G3, K), plant.G2)
    return parallel(plant.G1, path)
