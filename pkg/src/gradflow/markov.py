"""Finite-state Markov specialisation: generators, stationary distributions,
reversibility, the logarithmic mean, and the entropic Onsager structure.

Convention (fixed throughout): generators are TRANSPOSED.  Entry (i, j) is
the jump rate from state j to state i for i != j, columns sum to zero, and
probability column vectors evolve by ``dx/dt = generator @ x``.  Beware the
transpose trap when importing rate matrices from row-convention code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ColumnSumError,
    DegenerateKernelError,
    NegativeRateError,
    NonPositiveInputError,
    NonPositiveKernelError,
    NonPositiveStateError,
    NotReversibleError,
)
from .spectral import DEFAULT_TOL, as_square_matrix, as_vector
from .synthesis import (
    CanonicalGradientSystem,
    FlowResidualReport,
    GeneralisedSystemProbe,
)

#: Shortest ratio gap below which the logarithmic mean switches to its series.
_LOG_MEAN_BRANCH = 1e-8


@dataclass(frozen=True)
class GeneratorMatrix:
    """Transposed generator of a continuous-time chain.

    Use :func:`validate_generator` to construct one with the sign and
    column-sum invariants checked; direct construction only validates shape.
    """

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_square_matrix(self.matrix))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class EntropicStructure:
    """Stationary distribution and edge conductances of a reversible chain.

    ``weights[i, j] = generator[i, j] * stationary[j]``; detailed balance
    makes this matrix symmetric, which is required here.
    """

    stationary: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pi = as_vector(self.stationary)
        w = as_square_matrix(self.weights)
        if w.shape[0] != pi.size:
            raise ValueError("weights dimension does not match the distribution")
        if np.min(pi) <= 0.0:
            raise ValueError("stationary distribution must be strictly positive")
        if abs(pi.sum() - 1.0) > 1e-9:
            raise ValueError("stationary distribution must sum to 1")
        scale = max(float(np.max(np.abs(w))), 1e-300)
        if np.max(np.abs(w - w.T)) > 1e-9 * scale:
            raise ValueError("weights must be symmetric (detailed balance)")
        object.__setattr__(self, "stationary", pi)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.stationary.size

    @classmethod
    def from_generator(cls, gen: GeneratorMatrix,
                       tol: float = DEFAULT_TOL) -> "EntropicStructure":
        """Build the structure of a reversible chain; raises otherwise."""
        pi = stationary_distribution(gen, tol)
        if not is_reversible(gen, pi, tol):
            raise NotReversibleError(
                "chain is not reversible; no entropic structure exists")
        weights = gen.matrix * pi
        return cls(pi, (weights + weights.T) / 2.0)


def validate_generator(a, tol: float = DEFAULT_TOL) -> GeneratorMatrix:
    """Check the transposed-generator invariants and wrap the matrix.

    Off-diagonal entries must be non-negative and every column must sum to
    zero (both at ``tol`` scaled by the largest entry magnitude), which is
    what makes the flow preserve non-negativity and total probability.
    """
    a = as_square_matrix(a)
    scale = float(np.max(np.abs(a)))
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    if np.min(off) < -tol * scale:
        i, j = np.unravel_index(np.argmin(off), off.shape)
        raise NegativeRateError(f"negative jump rate {a[i, j]:g} at ({i}, {j})")
    sums = a.sum(axis=0)
    if np.max(np.abs(sums)) > tol * max(scale, 1e-300):
        j = int(np.argmax(np.abs(sums)))
        raise ColumnSumError(f"column {j} sums to {sums[j]:g}, expected 0")
    return GeneratorMatrix(a)


def stationary_distribution(gen: GeneratorMatrix,
                            tol: float = DEFAULT_TOL) -> np.ndarray:
    """Strictly positive kernel vector of the generator, normalised to sum 1.

    Raises :class:`DegenerateKernelError` when the kernel is not
    one-dimensional at tolerance (reducible chain) and
    :class:`NonPositiveKernelError` when the kernel vector has mixed signs
    or numerically vanishing entries.
    """
    a = gen.matrix
    _, s, v_rows = np.linalg.svd(a)
    if s[0] == 0.0:
        kernel_dim = gen.dim
    else:
        kernel_dim = int(np.sum(s <= tol * s[0]))
    if kernel_dim != 1:
        raise DegenerateKernelError(
            f"kernel dimension {kernel_dim}, expected 1 (chain reducible?)")
    vec = v_rows[-1]
    vec = vec * np.sign(vec[np.argmax(np.abs(vec))])
    if np.min(vec) <= tol * np.max(vec):
        raise NonPositiveKernelError("kernel vector is not strictly positive")
    return vec / vec.sum()


def is_reversible(gen: GeneratorMatrix, stationary,
                  tol: float = DEFAULT_TOL) -> bool:
    """Detailed balance in the transposed convention.

    True iff ``|a[i,j] pi[j] - a[j,i] pi[i]|`` is at most ``tol`` times the
    largest flux magnitude for every pair.
    """
    pi = as_vector(stationary, gen.dim)
    flux = gen.matrix * pi
    scale = max(float(np.max(np.abs(flux))), 1e-300)
    return bool(np.max(np.abs(flux - flux.T)) <= tol * scale)


def log_mean(a, b):
    """Logarithmic mean ``(a - b) / (log a - log b)``, extended by ``a`` on the diagonal.

    Accepts scalars or broadcastable arrays of strictly positive numbers.
    Near-equal arguments (log gap below 1e-8) switch to the symmetric series
    ``m (1 - u^2 / 3)`` with ``m = (a + b)/2`` and ``u = (a - b)/(a + b)``,
    which keeps full precision where the quotient cancels.
    """
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    if np.any(a_arr <= 0.0) or np.any(b_arr <= 0.0):
        raise NonPositiveInputError("logarithmic mean needs positive arguments")
    # |log(a) - log(b)| as log1p(spread/smaller): no cancellation for any
    # argument pair, and exactly symmetric under swapping a and b
    small = np.minimum(a_arr, b_arr)
    magnitude = np.log1p(np.abs(a_arr - b_arr) / small)
    gap = np.where(a_arr >= b_arr, magnitude, -magnitude)
    near = magnitude < _LOG_MEAN_BRANCH
    mean = 0.5 * (a_arr + b_arr)
    ratio = (a_arr - b_arr) / (a_arr + b_arr)
    series = mean * (1.0 - ratio * ratio / 3.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (a_arr - b_arr) / np.where(near, 1.0, gap)
    out = np.where(near, series, direct)
    if np.isscalar(a) and np.isscalar(b):
        return float(out)
    return out


def entropic_onsager(structure: EntropicStructure, x) -> np.ndarray:
    """State-dependent mobility of the entropy-driven chain.

    The weighted graph Laplacian with conductance
    ``weights[i, j] * log_mean(x[i]/pi[i], x[j]/pi[j])`` on each edge.  The
    result is symmetric positive semi-definite and annihilates constant
    vectors; on connected weight graphs its kernel is exactly the constants.
    """
    x = as_vector(x, structure.dim)
    if np.min(x) <= 0.0:
        raise NonPositiveStateError("state must be strictly positive")
    ratio = x / structure.stationary
    conduct = structure.weights * log_mean(ratio[:, None], ratio[None, :])
    np.fill_diagonal(conduct, 0.0)
    return np.diag(conduct.sum(axis=1)) - conduct


def relative_entropy(x, stationary):
    """Relative entropy ``sum x_i log(x_i / pi_i)`` and its gradient.

    Returns ``(value, gradient)`` with ``gradient[i] = log(x_i/pi_i) + 1``.
    The constant shift in the gradient is annihilated by the entropic
    mobility, so it never enters the flow.
    """
    x = as_vector(x)
    pi = as_vector(stationary, x.size)
    if np.min(x) <= 0.0 or np.min(pi) <= 0.0:
        raise NonPositiveInputError("entropy needs strictly positive vectors")
    ratio = x / pi
    return float(np.sum(x * np.log(ratio))), np.log(ratio) + 1.0


def entropic_probe(structure: EntropicStructure) -> GeneralisedSystemProbe:
    """Probe of the entropy-driven system, for linearisation at stationarity."""
    pi = structure.stationary

    def energy_grad(x):
        return relative_entropy(x, pi)[1]

    def dissipation_grad(x, force):
        return entropic_onsager(structure, x) @ np.asarray(force, dtype=float)

    return GeneralisedSystemProbe(structure.dim, pi, energy_grad, dissipation_grad)


def verify_entropic_flow(gen: GeneratorMatrix, structure: EntropicStructure,
                         samples: int = 1000, seed: int = 0,
                         tol: float = DEFAULT_TOL) -> FlowResidualReport:
    """Sampled check of ``generator @ x = -mobility(x) @ entropy_grad(x)``.

    Requires reversibility (the entropic structure only matches the flow of
    reversible chains); raises :class:`NotReversibleError` otherwise.
    Samples interior probability vectors with all coordinates at least 1e-3
    and reports the worst relative residual, with the velocity norm floored
    to avoid blow-up near stationarity.
    """
    if not is_reversible(gen, structure.stationary, tol):
        raise NotReversibleError("chain fails detailed balance")
    rng = np.random.default_rng(seed)
    dim = gen.dim
    floor = 1e-3
    points = rng.dirichlet(np.ones(dim), size=samples) * (1.0 - dim * floor) + floor
    velocity_floor = 1e-6 * max(float(np.linalg.norm(gen.matrix)), 1.0)
    worst = 0.0
    worst_point = points[0]
    for x in points:
        velocity = gen.matrix @ x
        _, grad = relative_entropy(x, structure.stationary)
        defect = np.linalg.norm(velocity + entropic_onsager(structure, x) @ grad)
        residual = defect / max(np.linalg.norm(velocity), velocity_floor)
        if residual > worst:
            worst = residual
            worst_point = x
    return FlowResidualReport(float(worst), samples, worst_point)


def reversible_three_state() -> GeneratorMatrix:
    """Symmetric three-state chain with uniform stationary distribution.

    The flow of this generator is driven by the relative entropy through
    the logarithmic-mean mobility; see :func:`entropic_onsager`.
    """
    return GeneratorMatrix(np.array([[-2.0, 1.0, 1.0],
                                     [1.0, -2.0, 1.0],
                                     [1.0, 1.0, -2.0]]))


def nonreversible_three_state() -> GeneratorMatrix:
    """Three-state chain that fails detailed balance yet is real diagonalisable.

    Its spectrum is {0, -3, -6}; a constant-mobility gradient system for it
    is returned by :func:`nonreversible_three_state_system`.
    """
    return GeneratorMatrix(np.array([[-2.0, 0.0, 2.0],
                                     [1.0, -3.0, 2.0],
                                     [1.0, 3.0, -4.0]]))


def nonreversible_three_state_system() -> CanonicalGradientSystem:
    """A canonical gradient system whose flow is the non-reversible chain.

    The pair satisfies ``generator = -onsager @ hessian`` exactly; it is one
    admissible choice among many, since such factorisations are never
    unique.
    """
    onsager = np.array([[3.0, 1.5, -1.5],
                        [1.5, 2.25, -0.75],
                        [-1.5, -0.75, 5.25]])
    hessian = np.array([[4.0, -4.0, 0.0],
                        [-4.0, 6.0, -2.0],
                        [0.0, -2.0, 2.0]]) / 3.0
    return CanonicalGradientSystem(onsager, hessian, np.zeros(3))
