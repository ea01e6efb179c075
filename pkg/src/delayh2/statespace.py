"""Dense state-space algebra for discrete-time linear systems.

Systems evolve as ``x[t+1] = A x[t] + B u[t]``, ``y[t] = C x[t] + D u[t]``
and are represented by immutable :class:`StateSpaceModel` values; every
operation is a pure function returning new values.  All matrices are small
and dense, so solvers favour transparency over asymptotic cleverness:
Lyapunov/Sylvester equations are vectorized into one dense linear solve and
the Riccati equation is iterated to a fixed point.

``vec`` stacks columns (Fortran order) throughout, which is the convention
under which vec(A X B) = (B^T kron A) vec(X).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AssumptionViolated,
    DimensionMismatch,
    SolverFailure,
    UnstableSystem,
)

# Slack on the unit circle when declaring a matrix stable.
TOL_STAB = 1e-9

# Fixed-point Riccati iteration limits.
DARE_MAX_ITER = 10000
DARE_TOL = 1e-12


def _as_matrix(m) -> np.ndarray:
    return np.atleast_2d(np.asarray(m, dtype=float))


def vec(m: np.ndarray) -> np.ndarray:
    """Column-stack a matrix into a 1-d vector."""
    return np.asarray(m, dtype=float).reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec` for a matrix of known shape."""
    return np.asarray(v, dtype=float).reshape((rows, cols), order="F")


def spectral_radius(a: np.ndarray) -> float:
    """Largest eigenvalue modulus of a square matrix (0 for the 0x0 matrix)."""
    a = _as_matrix(a)
    if a.shape[0] == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def _require_stable(a: np.ndarray, what: str) -> None:
    rho = spectral_radius(a)
    if rho >= 1.0 - TOL_STAB:
        raise UnstableSystem(f"{what}: spectral radius {rho:.6g} >= 1 - {TOL_STAB:g}")


@dataclass(frozen=True)
class StateSpaceModel:
    """A real discrete-time realization (A, B, C, D).

    The state dimension may be zero, in which case the model is the static
    gain D.  Instances are immutable; treat the arrays as read-only.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        a, b, c, d = map(_as_matrix, (self.a, self.b, self.c, self.d))
        n = a.shape[0]
        if a.shape != (n, n):
            raise DimensionMismatch(f"A must be square, got {a.shape}")
        if b.shape[0] != n:
            raise DimensionMismatch(f"B has {b.shape[0]} rows, expected {n}")
        if c.shape[1] != n:
            raise DimensionMismatch(f"C has {c.shape[1]} cols, expected {n}")
        if d.shape != (c.shape[0], b.shape[1]):
            raise DimensionMismatch(
                f"D is {d.shape}, expected {(c.shape[0], b.shape[1])}"
            )
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @property
    def order(self) -> int:
        return self.a.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.b.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.c.shape[0]

    @property
    def is_stable(self) -> bool:
        """Spectral radius of A strictly inside the unit circle."""
        return spectral_radius(self.a) < 1.0

    @staticmethod
    def static(d) -> "StateSpaceModel":
        """Zero-state model realizing a constant gain."""
        d = _as_matrix(d)
        return StateSpaceModel(
            np.zeros((0, 0)), np.zeros((0, d.shape[1])), np.zeros((d.shape[0], 0)), d
        )

    @staticmethod
    def identity(k: int) -> "StateSpaceModel":
        return StateSpaceModel.static(np.eye(k))


@dataclass(frozen=True)
class ImpulseResponse:
    """Markov parameters G_0 ... G_T of a model, G_0 = D, G_k = C A^{k-1} B."""

    terms: tuple
    horizon: int

    def __post_init__(self):
        if len(self.terms) != self.horizon + 1:
            raise DimensionMismatch("terms must hold horizon + 1 matrices")
        object.__setattr__(self, "terms", tuple(_as_matrix(t) for t in self.terms))

    def __getitem__(self, k: int) -> np.ndarray:
        return self.terms[k]

    def __len__(self) -> int:
        return len(self.terms)


def impulse_response(g: StateSpaceModel, horizon: int) -> ImpulseResponse:
    """Markov parameters of ``g`` up to lag ``horizon`` (inclusive).

    Parameters
    ----------
    g : StateSpaceModel
    horizon : int
        Largest lag to compute; must be >= 0.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    terms = [g.d]
    w = g.b
    for _ in range(horizon):
        terms.append(g.c @ w)
        w = g.a @ w
    return ImpulseResponse(tuple(terms), horizon)


def multiply(g: StateSpaceModel, h: StateSpaceModel) -> StateSpaceModel:
    """Realization of the transfer-matrix product G(z) H(z)."""
    if g.n_inputs != h.n_outputs:
        raise DimensionMismatch(
            f"product undefined: G has {g.n_inputs} inputs, H has {h.n_outputs} outputs"
        )
    ng, nh = g.order, h.order
    a = np.block(
        [[g.a, g.b @ h.c], [np.zeros((nh, ng)), h.a]]
    )
    b = np.vstack([g.b @ h.d, h.b])
    c = np.hstack([g.c, g.d @ h.c])
    return StateSpaceModel(a, b, c, g.d @ h.d)


def add(g: StateSpaceModel, h: StateSpaceModel) -> StateSpaceModel:
    """Realization of G(z) + H(z)."""
    if (g.n_inputs, g.n_outputs) != (h.n_inputs, h.n_outputs):
        raise DimensionMismatch("sum undefined: incompatible input/output dimensions")
    ng, nh = g.order, h.order
    a = np.block([[g.a, np.zeros((ng, nh))], [np.zeros((nh, ng)), h.a]])
    return StateSpaceModel(a, np.vstack([g.b, h.b]), np.hstack([g.c, h.c]), g.d + h.d)


def neg(g: StateSpaceModel) -> StateSpaceModel:
    return StateSpaceModel(g.a, g.b, -g.c, -g.d)


def sub(g: StateSpaceModel, h: StateSpaceModel) -> StateSpaceModel:
    return add(g, neg(h))


def transpose(g: StateSpaceModel) -> StateSpaceModel:
    """Realization of G(z)^T (transpose at every frequency)."""
    return StateSpaceModel(g.a.T, g.c.T, g.b.T, g.d.T)


def inverse(g: StateSpaceModel) -> StateSpaceModel:
    """Realization of G(z)^{-1}; requires an invertible feedthrough."""
    if g.n_inputs != g.n_outputs:
        raise DimensionMismatch("inverse undefined for non-square systems")
    try:
        d_inv = np.linalg.inv(g.d)
    except np.linalg.LinAlgError as exc:
        raise SolverFailure("feedthrough is singular; inverse has no proper realization") from exc
    return StateSpaceModel(
        g.a - g.b @ d_inv @ g.c, g.b @ d_inv, -d_inv @ g.c, d_inv
    )


def h2_norm_sq(g: StateSpaceModel) -> float:
    """Squared H2 norm: the sum of squared Frobenius norms of all Markov
    parameters, computed exactly through the observability Gramian.

    Raises
    ------
    UnstableSystem
        If the spectral radius of A is not strictly inside the unit circle.
    """
    _require_stable(g.a, "h2_norm_sq")
    static_part = float(np.trace(g.d.T @ g.d))
    if g.order == 0:
        return static_part
    w_obs = dlyap_cross(g.a, g.c, g.a, g.c)
    return static_part + float(np.trace(g.b.T @ w_obs @ g.b))


def dlyap_cross(
    a_g: np.ndarray, c_g: np.ndarray, a_h: np.ndarray, c_h: np.ndarray
) -> np.ndarray:
    """Solve the Sylvester-type equation  Gamma = A_g^T Gamma A_h + C_g^T C_h.

    The equation is vectorized into the dense linear system
    ``(I - A_h^T kron A_g^T) vec(Gamma) = vec(C_g^T C_h)``, which is fine at
    the matrix sizes this package deals with.
    """
    a_g, c_g, a_h, c_h = map(_as_matrix, (a_g, c_g, a_h, c_h))
    _require_stable(a_g, "dlyap_cross (left factor)")
    _require_stable(a_h, "dlyap_cross (right factor)")
    n_g, n_h = a_g.shape[0], a_h.shape[0]
    rhs = c_g.T @ c_h
    if n_g == 0 or n_h == 0:
        return np.zeros((n_g, n_h))
    lhs = np.eye(n_g * n_h) - np.kron(a_h.T, a_g.T)
    try:
        sol = np.linalg.solve(lhs, vec(rhs))
    except np.linalg.LinAlgError as exc:
        raise SolverFailure("singular Lyapunov/Sylvester system") from exc
    return unvec(sol, n_g, n_h)


def conjugate_product(
    g: StateSpaceModel, h: StateSpaceModel
) -> tuple[StateSpaceModel, StateSpaceModel]:
    """Split G(z)~ H(z) into its causal and strictly anticausal parts.

    ``G~`` denotes the conjugate system ``G(1/z)^T``.  For stable G and H
    the product G~H equals ``causal(z) + anti(1/z)^T`` where both returned
    models are causal and stable and ``anti`` has zero feedthrough; the
    caller re-conjugates ``anti`` when the actual anticausal term is needed.

    Returns
    -------
    (causal, anti) : pair of StateSpaceModel
    """
    if g.n_outputs != h.n_outputs:
        raise DimensionMismatch(
            "G~H undefined: G and H must share their output dimension"
        )
    gamma = dlyap_cross(g.a, g.c, h.a, h.c)
    causal = StateSpaceModel(
        h.a,
        h.b,
        g.b.T @ gamma @ h.a + g.d.T @ h.c,
        g.d.T @ h.d + g.b.T @ gamma @ h.b,
    )
    anti = StateSpaceModel(
        g.a,
        g.b,
        h.b.T @ gamma.T @ g.a + h.d.T @ g.c,
        np.zeros((h.n_inputs, g.n_inputs)),
    )
    return causal, anti


def dare_solve(a: np.ndarray, b: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Stabilizing solution of  X = Q + A^T X A - A^T X B (I + B^T X B)^{-1} B^T X A.

    Solved by the fixed-point iteration X <- rhs(X) started at X = Q, which
    converges for stabilizable (A, B) and detectable (A, Q^{1/2}).  The unit
    input weight is baked into the equation; scale B and Q beforehand if a
    different weighting is wanted.

    Raises
    ------
    SolverFailure
        If the iteration does not reach ``DARE_TOL`` within ``DARE_MAX_ITER``.
    AssumptionViolated
        If the resulting closed loop A + B K is not stable.
    """
    a, b, q = map(_as_matrix, (a, b, q))
    n, m = a.shape[0], b.shape[1]
    if q.shape != (n, n) or b.shape[0] != n:
        raise DimensionMismatch("dare_solve: incompatible shapes")
    q = 0.5 * (q + q.T)
    x = q.copy()
    for _ in range(DARE_MAX_ITER):
        bxb = np.eye(m) + b.T @ x @ b
        try:
            gain_term = np.linalg.solve(bxb, b.T @ x @ a)
        except np.linalg.LinAlgError as exc:
            raise SolverFailure("singular innovation matrix in Riccati iteration") from exc
        x_next = q + a.T @ x @ a - a.T @ x @ b @ gain_term
        x_next = 0.5 * (x_next + x_next.T)
        if not np.isfinite(x_next).all():
            raise SolverFailure(
                "Riccati iteration diverged; (A, B) is likely not stabilizable"
            )
        residual = np.linalg.norm(x_next - x, "fro") / (1.0 + np.linalg.norm(x_next, "fro"))
        x = x_next
        if residual < DARE_TOL:
            break
    else:
        raise SolverFailure(
            f"Riccati iteration did not converge in {DARE_MAX_ITER} steps "
            f"(residual {residual:.3g})"
        )
    k = -np.linalg.solve(np.eye(m) + b.T @ x @ b, b.T @ x @ a)
    if spectral_radius(a + b @ k) >= 1.0 - TOL_STAB:
        raise AssumptionViolated(
            "Riccati closed loop is not stable; check stabilizability/detectability"
        )
    return x
