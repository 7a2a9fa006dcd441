"""Single- and two-mode Gaussian states described by their correlation matrix.

Ordering convention: per mode the operator vector is ``(a, a^dagger)`` and
``G[mu, nu] = <a_mu a_nu^dagger>``, so a single mode reads

    G = [[beta, alpha], [conj(alpha), beta - 1]]

with ``beta = <a a^dagger>`` and ``alpha = <a a>``. Two modes stack as
``(a1, a1^dagger, a2, a2^dagger)`` giving blocks ``G1``, ``W``, ``G2``.

Construction enforces Hermiticity and the canonical-commutator diagonal
``G[0,0] - G[1,1] = 1`` per mode. Positivity is *not* enforced: evolved
states of a non-positive semigroup are legitimate objects to inspect, and
``validate`` reports on them.
"""
from dataclasses import dataclass
from typing import ClassVar, Union

import numpy as np

from . import linalg
from .errors import NotPSD, Singular, StructureError

CCR_TOL = 1e-10


def ccr_signature(modes):
    """``diag(+1, -1)`` per mode: ``G - V`` equals half of this matrix."""
    return np.kron(np.eye(modes), linalg.SIGMA_Z)


def ccr_defect(G):
    """Largest deviation of ``G[2k,2k] - G[2k+1,2k+1]`` from 1 over all modes."""
    G = np.asarray(G)
    d = np.diagonal(G).real
    return float(np.max(np.abs(d[0::2] - d[1::2] - 1.0)))


def _checked(G, dim):
    G = linalg.hermitian(G)
    if G.shape != (dim, dim):
        raise StructureError(f"expected a {dim}x{dim} matrix, got shape {G.shape}")
    defect = ccr_defect(G)
    if defect > CCR_TOL * linalg.scale(G):
        raise StructureError(f"CCR diagonal constraint violated by {defect:.3g}")
    G.flags.writeable = False
    return G


@dataclass(frozen=True, eq=False)
class SingleModeState:
    G: np.ndarray
    modes: ClassVar[int] = 1

    def __post_init__(self):
        object.__setattr__(self, "G", _checked(self.G, 2))

    @classmethod
    def from_moments(cls, beta, alpha=0.0):
        alpha = complex(alpha)
        return cls(np.array([[beta, alpha], [alpha.conjugate(), beta - 1.0]]))

    @classmethod
    def vacuum(cls):
        return cls.from_moments(1.0, 0.0)

    @classmethod
    def thermal(cls, beta):
        return cls.from_moments(beta, 0.0)

    @property
    def beta(self):
        return float(self.G[0, 0].real)

    @property
    def alpha(self):
        return complex(self.G[0, 1])

    def __repr__(self):
        return f"SingleModeState(beta={self.beta!r}, alpha={self.alpha!r})"


@dataclass(frozen=True, eq=False)
class TwoModeState:
    G: np.ndarray
    modes: ClassVar[int] = 2

    def __post_init__(self):
        object.__setattr__(self, "G", _checked(self.G, 4))

    @classmethod
    def from_blocks(cls, G1, G2, W=None):
        W = np.zeros((2, 2), dtype=complex) if W is None else np.asarray(W, dtype=complex)
        return cls(np.block([[G1, W], [linalg.dagger(W), G2]]))

    @classmethod
    def product(cls, g1, g2):
        """Uncorrelated state with ``W = 0``."""
        return cls.from_blocks(g1.G, g2.G)

    @classmethod
    def vacuum(cls):
        return cls.product(SingleModeState.vacuum(), SingleModeState.vacuum())

    @property
    def G1(self):
        return self.G[:2, :2]

    @property
    def G2(self):
        return self.G[2:, 2:]

    @property
    def W(self):
        return self.G[:2, 2:]

    def __repr__(self):
        return f"TwoModeState(G={self.G!r})"


GaussianState = Union[SingleModeState, TwoModeState]


def state_from_matrix(G):
    """Wrap a 2x2 or 4x4 correlation matrix in the matching state type."""
    G = np.asarray(G, dtype=complex)
    if G.shape == (2, 2):
        return SingleModeState(G)
    if G.shape == (4, 4):
        return TwoModeState(G)
    raise StructureError(f"expected a 2x2 or 4x4 matrix, got shape {G.shape}")


@dataclass(frozen=True)
class Validation:
    psd: bool
    min_eig: float
    structure_ok: bool


def validate(state):
    """Positivity and CCR diagnostics. Never raises.

    Accepts a state object or a bare matrix; for a bare matrix the CCR
    structure is checked rather than assumed.
    """
    G = state.G if isinstance(state, (SingleModeState, TwoModeState)) else state
    try:
        G = linalg.hermitian(G)
    except StructureError:
        return Validation(psd=False, min_eig=float("nan"), structure_ok=False)
    min_eig = float(linalg.min_eigenvalue(G))
    psd = bool(min_eig >= -linalg.PSD_TOL * linalg.scale(G))
    structure_ok = ccr_defect(G) <= CCR_TOL * linalg.scale(G)
    return Validation(psd=psd, min_eig=min_eig, structure_ok=bool(structure_ok))


@dataclass(frozen=True, eq=False)
class SymmetricCovariance:
    """``V[mu, nu] = <{a_mu, a_nu^dagger}>/2``."""

    V: np.ndarray

    @property
    def modes(self):
        return self.V.shape[0] // 2


def to_symmetric(state):
    # {a, a^dagger} = 2 a a^dagger - [a, a^dagger]; the commutator is +1 for
    # (a, a^dagger) pairs and -1 for (a^dagger, a) pairs.
    return SymmetricCovariance(state.G - 0.5 * ccr_signature(state.modes))


def from_symmetric(V):
    if isinstance(V, SymmetricCovariance):
        V = V.V
    V = linalg.hermitian(V)
    return state_from_matrix(V + 0.5 * ccr_signature(V.shape[0] // 2))


def marginal(state, which):
    """Reduced single-mode state of mode ``which`` (1 or 2)."""
    if which == 1:
        return SingleModeState(state.G1)
    if which == 2:
        return SingleModeState(state.G2)
    raise ValueError(f"mode index must be 1 or 2, got {which!r}")


_PT = np.block([[np.eye(2), np.zeros((2, 2))], [np.zeros((2, 2)), linalg.SIGMA_X]])


def partial_transpose(state):
    """Correlation matrix after transposing mode 2 (``a2 <-> a2^dagger``).

    The swap is applied to the symmetric covariance and converted back, so
    the result has blocks ``G1``, ``W sigma_x`` and ``G2^T``.
    """
    V = to_symmetric(state).V
    Vt = _PT @ V @ _PT
    return linalg.hermitian(Vt + 0.5 * ccr_signature(2), check=False)


@dataclass(frozen=True)
class PPTResult:
    min_eig_pt: float
    entangled: bool


def ppt_witness(state):
    Gt = partial_transpose(state)
    min_eig = float(linalg.min_eigenvalue(Gt))
    return PPTResult(min_eig_pt=min_eig, entangled=bool(min_eig < -linalg.PSD_TOL * linalg.scale(Gt)))


@dataclass(frozen=True)
class SchurResult:
    schur_min_eig: float
    reduced_min_eig: float


def schur_ppt_matrix(state):
    """Schur complement of the transposed mode-2 block in the partial transpose.

    For a critical state this is
    ``G1 - K sigma_x (G2^T)^{-1} sigma_x K^H`` with ``K = G1^{1/2} G2^{1/2}``.
    """
    return linalg.schur_complement_upper(partial_transpose(state))


def reduced_ppt_matrix(G2):
    """``G2^{-1} - sigma_x (G2^T)^{-1} sigma_x``.

    Congruent (through ``K``) to ``schur_ppt_matrix`` of the critical state
    built on ``G2``, so it carries the same sign information when ``G1`` is
    invertible.
    """
    G2 = np.asarray(G2, dtype=complex)
    X = linalg.SIGMA_X
    return linalg.hermitian(linalg.inverse(G2) - X @ linalg.inverse(G2.T) @ X, check=False)


def schur_entanglement_test(state):
    """Minimum eigenvalues of the two 2x2 reductions of the PPT test."""
    return SchurResult(
        schur_min_eig=float(linalg.min_eigenvalue(schur_ppt_matrix(state))),
        reduced_min_eig=float(linalg.min_eigenvalue(reduced_ppt_matrix(state.G2))),
    )


def _require_valid(g, name):
    v = validate(g)
    if not v.psd:
        raise NotPSD(f"{name} is not a physical state (min eigenvalue {v.min_eig:.3g})")


def build_critical_state(g1, g2):
    """Maximally correlated state with off-diagonal block ``G1^{1/2} G2^{1/2}``.

    The result is positive semidefinite with a kernel of dimension at least
    two and has ``g1`` and ``g2`` as its marginals.
    """
    _require_valid(g1, "g1")
    _require_valid(g2, "g2")
    if linalg.determinant(g2.G) <= 1e-10:
        raise Singular("G2 must be invertible (det G2 <= 1e-10)")
    W = linalg.sqrt_psd(g1.G) @ linalg.sqrt_psd(g2.G)
    return TwoModeState.from_blocks(g1.G, g2.G, W)


def null_eigenvector(state, psi):
    """Unit kernel vector ``(psi, -G2^{-1/2} G1^{1/2} psi)`` of a critical state."""
    psi = np.asarray(psi, dtype=complex).reshape(2)
    if not np.any(psi):
        raise ValueError("psi must be nonzero")
    X = linalg.inverse(linalg.sqrt_psd(state.G2)) @ linalg.sqrt_psd(state.G1)
    Psi = np.concatenate([psi, -X @ psi])
    return Psi / np.linalg.norm(Psi)


def state_to_json(state):
    return {
        "modes": state.modes,
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in state.G],
    }


def matrix_from_json(doc):
    """Parse the JSON state schema into a Hermitian matrix (CCR not checked)."""
    if not isinstance(doc, dict):
        raise StructureError("state document must be a JSON object")
    modes = doc.get("modes")
    if modes not in (1, 2):
        raise StructureError(f"field 'modes' must be 1 or 2, got {modes!r}")
    rows = doc.get("matrix")
    dim = 2 * modes
    if not isinstance(rows, list) or len(rows) != dim:
        raise StructureError(f"field 'matrix' must have {dim} rows")
    G = np.empty((dim, dim), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise StructureError(f"matrix row {i} must have {dim} entries")
        for j, z in enumerate(row):
            if not (isinstance(z, list) and len(z) == 2):
                raise StructureError(f"matrix[{i}][{j}] must be a [re, im] pair")
            try:
                G[i, j] = complex(float(z[0]), float(z[1]))
            except (TypeError, ValueError):
                raise StructureError(f"matrix[{i}][{j}] is not numeric") from None
    return linalg.hermitian(G)


def state_from_json(doc):
    return state_from_matrix(matrix_from_json(doc))
