"""Generalized Jaynes-Cummings Hamiltonians on the graded carrier basis.

Two variants are supported: the hermitian single-coupling form

  H = w_b N_b + w_f N_f + (lam/2) ({b-,f+} + {b+,f-})

and the four-coupling form

  H = w_b N_b + w_f N_f + l1 b-f+ + l2 f+b- + l3 b+f- + l4 f-b+

whose orderings differ for p >= 2.  Both conserve the total charge
C = N_b + N_f, so H splits into finite blocks keyed by c = m + n; spectra
and time evolution are computed per block by dense hermitian
eigendecomposition, which is exact to rounding at these sizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .carrier import CarrierBasis, ProjectedOps

CONSERVATION_TOL = 1e-10
HERMITICITY_TOL = 1e-12
NORM_TOL = 1e-9


class NonHermitianError(ValueError):
    """Evolution requested for a non-hermitian Hamiltonian without override."""


@dataclass
class ModelParams:
    variant: str = "eq1"  # "eq1" or "eq2"
    omega_b: float = 1.0
    omega_f: float = 1.0
    lam: float = 0.1  # eq1 coupling
    lam1: complex = 0.0  # eq2 couplings multiplying b-f+, f+b-, b+f-, f-b+
    lam2: complex = 0.0
    lam3: complex = 0.0
    lam4: complex = 0.0
    hermitize: bool = True

    def __post_init__(self):
        if self.variant not in ("eq1", "eq2"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant == "eq2" and self.hermitize:
            l4, l3 = np.conj(self.lam1), np.conj(self.lam2)
            for name, given, implied in (("lam4", self.lam4, l4), ("lam3", self.lam3, l3)):
                if given != 0 and abs(given - implied) > 1e-15:
                    raise ValueError(
                        f"hermitize=True contradicts explicit {name}={given}"
                    )
            self.lam4, self.lam3 = complex(l4), complex(l3)


@dataclass
class HamiltonianMatrix:
    matrix: np.ndarray = field(repr=False)
    labels: list[tuple[int, int, int]]
    hermitian: bool
    p: int
    M_keep: int
    # eq1 only: max entrywise difference of the two written forms on interior blocks
    form_difference: float | None = None

    def block_charges(self) -> list[int]:
        return sorted({m + n for (m, n, _) in self.labels})

    def block_indices(self, c: int) -> list[int]:
        return [k for k, (m, n, _) in enumerate(self.labels) if m + n == c]

    def block_is_boundary(self, c: int) -> bool:
        """Block touches the m = M_keep truncation boundary."""
        return any(m == self.M_keep for (m, n, _) in self.labels if m + n == c)


# -- carrier-space operator assembly ------------------------------------------

def generator_matrix(projected: ProjectedOps, name: str) -> np.ndarray:
    """Full carrier-basis matrix of one projected generator."""
    from .carrier import SHIFTS

    labels = _labels(projected)
    index = {lab: k for k, lab in enumerate(labels)}
    dim = len(labels)
    out = np.zeros((dim, dim), dtype=complex)
    dm, dn = SHIFTS[name]
    for (m, n), d in sorted(projected.dims.items()):
        block = projected.block(name, m, n)
        if block is None:
            continue
        for c in range(d):
            src = index[(m, n, c)]
            for r in range(block.shape[0]):
                out[index[(m + dm, n + dn, r)], src] = block[r, c]
    return out


def _labels(projected: ProjectedOps) -> list[tuple[int, int, int]]:
    out = []
    for (m, n) in sorted(projected.dims):
        out.extend((m, n, i) for i in range(projected.dims[(m, n)]))
    return out


def number_matrices(projected: ProjectedOps) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal N_b and N_f from the grade labels."""
    labels = _labels(projected)
    nb = np.diag([float(m) for (m, n, i) in labels]).astype(complex)
    nf = np.diag([float(n) for (m, n, i) in labels]).astype(complex)
    return nb, nf


def interaction_eq1(projected: ProjectedOps, lam: float) -> np.ndarray:
    """(lam/2) ({b-,f+} + {b+,f-}) on the carrier basis."""
    bp = generator_matrix(projected, "b+")
    bm = generator_matrix(projected, "b-")
    fp = generator_matrix(projected, "f+")
    fm = generator_matrix(projected, "f-")
    up = bm @ fp + fp @ bm  # grade shift (-1, +1)
    down = bp @ fm + fm @ bp  # grade shift (+1, -1)
    return (lam / 2.0) * (up + down)


def interaction_eq2(projected: ProjectedOps, params: ModelParams) -> np.ndarray:
    """l1 b-f+ + l2 f+b- + l3 b+f- + l4 f-b+; orderings differ for p >= 2."""
    bp = generator_matrix(projected, "b+")
    bm = generator_matrix(projected, "b-")
    fp = generator_matrix(projected, "f+")
    fm = generator_matrix(projected, "f-")
    return (
        params.lam1 * (bm @ fp)
        + params.lam2 * (fp @ bm)
        + params.lam3 * (bp @ fm)
        + params.lam4 * (fm @ bp)
    )


def build_hamiltonian(params: ModelParams, projected: ProjectedOps) -> HamiltonianMatrix:
    if params.variant == "eq1":
        return build_h_eq1(params, projected)
    return build_h_eq2(params, projected)


def build_h_eq1(params: ModelParams, projected: ProjectedOps) -> HamiltonianMatrix:
    """Single-coupling hermitian Hamiltonian, assembled in both written forms.

    Form (i) uses the grade labels for the number operators; form (ii) uses
    the bilinears (w_b/2){b+,b-} + (w_f/2)[f+,f-] + (w_f - w_b) p / 2.  Their
    difference on interior blocks (m < M_keep on both sides of every entry)
    is recorded and must vanish to rounding; the boundary blocks of form (ii)
    are truncation-contaminated because b-b+ needs the absent b+ block out of
    m = M_keep.
    """
    labels = _labels(projected)
    nb, nf = number_matrices(projected)
    h_int = interaction_eq1(projected, params.lam)
    h1 = params.omega_b * nb + params.omega_f * nf + h_int

    bp = generator_matrix(projected, "b+")
    bm = generator_matrix(projected, "b-")
    fp = generator_matrix(projected, "f+")
    fm = generator_matrix(projected, "f-")
    const = (params.omega_f - params.omega_b) * projected.p / 2.0
    h2 = (
        params.omega_b / 2.0 * (bp @ bm + bm @ bp)
        + params.omega_f / 2.0 * (fp @ fm - fm @ fp)
        + const * np.eye(len(labels))
        + h_int
    )
    interior = np.array([m < projected.M_keep for (m, n, i) in labels])
    mask = np.outer(interior, interior)
    diff = float(np.max(np.abs((h1 - h2)[mask]))) if mask.any() else 0.0

    return HamiltonianMatrix(
        matrix=h1,
        labels=labels,
        hermitian=_is_hermitian(h1),
        p=projected.p,
        M_keep=projected.M_keep,
        form_difference=diff,
    )


def build_h_eq2(params: ModelParams, projected: ProjectedOps) -> HamiltonianMatrix:
    labels = _labels(projected)
    nb, nf = number_matrices(projected)
    h = params.omega_b * nb + params.omega_f * nf + interaction_eq2(projected, params)
    return HamiltonianMatrix(
        matrix=h,
        labels=labels,
        hermitian=_is_hermitian(h),
        p=projected.p,
        M_keep=projected.M_keep,
    )


def _is_hermitian(h: np.ndarray) -> bool:
    return bool(np.max(np.abs(h - h.conj().T)) <= HERMITICITY_TOL * max(1.0, np.max(np.abs(h))))


# -- block decomposition and spectra ------------------------------------------

@dataclass
class BlockSpectrum:
    charge: int
    labels: list[tuple[int, int, int]]
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, in the labels' order
    boundary: bool


@dataclass
class Spectrum:
    blocks: list[BlockSpectrum]

    def all_eigenvalues(self) -> np.ndarray:
        return np.sort(np.concatenate([b.eigenvalues for b in self.blocks]))


def block_decompose(h: HamiltonianMatrix) -> dict[int, np.ndarray]:
    """Split H into blocks keyed by conserved charge c = m + n.

    Verifies [H, N_b + N_f] and that every off-block entry is absent; a
    violation above tolerance means the representation is corrupted.
    """
    charge = np.array([float(m + n) for (m, n, _) in h.labels])
    comm = h.matrix * (charge[None, :] - charge[:, None])
    worst = float(np.max(np.abs(comm))) if comm.size else 0.0
    if worst > CONSERVATION_TOL:
        raise RuntimeError(
            f"charge conservation violated: |[H, N_b+N_f]|_max = {worst:.2e}"
        )
    blocks = {}
    for c in h.block_charges():
        idx = h.block_indices(c)
        blocks[c] = h.matrix[np.ix_(idx, idx)]
    return blocks


def charge_commutator_norm(h: HamiltonianMatrix) -> float:
    charge = np.array([float(m + n) for (m, n, _) in h.labels])
    comm = h.matrix * (charge[None, :] - charge[:, None])
    return float(np.max(np.abs(comm))) if comm.size else 0.0


def spectrum(h: HamiltonianMatrix) -> Spectrum:
    if not h.hermitian:
        raise NonHermitianError("spectrum requires a hermitian Hamiltonian")
    blocks = block_decompose(h)
    out = []
    for c, mat in sorted(blocks.items()):
        vals, vecs = np.linalg.eigh(mat)
        idx = h.block_indices(c)
        labels = [h.labels[k] for k in idx]
        resid = np.max(np.abs(mat @ vecs - vecs * vals[None, :]))
        scale = max(1.0, float(np.max(np.abs(mat))))
        if resid > 1e-10 * scale:
            raise RuntimeError(f"eigensolve residual {resid:.2e} in block c={c}")
        out.append(BlockSpectrum(c, labels, vals, vecs, h.block_is_boundary(c)))
    return Spectrum(blocks=out)


# -- time evolution -----------------------------------------------------------

@dataclass
class Trajectory:
    times: np.ndarray
    labels: list[tuple[int, int, int]]
    amplitudes: np.ndarray = field(repr=False)  # shape (len(times), len(labels))

    def populations(self) -> dict[tuple[int, int], np.ndarray]:
        """P_{m,n}(t), summed over the intra-grade index."""
        out: dict[tuple[int, int], np.ndarray] = {}
        probs = np.abs(self.amplitudes) ** 2
        for k, (m, n, _) in enumerate(self.labels):
            out.setdefault((m, n), np.zeros(len(self.times)))
            out[(m, n)] += probs[:, k]
        return out

    def expect_n_b(self) -> np.ndarray:
        w = np.array([m for (m, n, _) in self.labels], dtype=float)
        return (np.abs(self.amplitudes) ** 2) @ w

    def expect_n_f(self) -> np.ndarray:
        w = np.array([n for (m, n, _) in self.labels], dtype=float)
        return (np.abs(self.amplitudes) ** 2) @ w

    def inversion(self, p: int) -> np.ndarray:
        return self.expect_n_f() - p / 2.0

    def norm_drift(self) -> float:
        norms = np.sum(np.abs(self.amplitudes) ** 2, axis=1)
        return float(np.max(np.abs(norms - 1.0)))


def evolve(
    h: HamiltonianMatrix,
    initial: dict[tuple[int, int, int], complex],
    times: np.ndarray,
    allow_boundary: bool = False,
    allow_nonhermitian: bool = False,
) -> Trajectory:
    """Spectral time evolution a(t) = sum_k exp(-i E_k t) <k|a(0)> |k>.

    The initial state must be normalized and, unless overridden, supported
    away from truncation-contaminated blocks (those touching m = M_keep).
    """
    if not h.hermitian and not allow_nonhermitian:
        raise NonHermitianError(
            "refusing to evolve under a non-hermitian Hamiltonian "
            "(pass allow_nonhermitian=True to override)"
        )
    index = {lab: k for k, lab in enumerate(h.labels)}
    psi0 = np.zeros(len(h.labels), dtype=complex)
    for lab, amp in initial.items():
        if lab not in index:
            raise ValueError(f"initial-state label {lab} not in the carrier basis")
        psi0[index[lab]] = amp
    nrm = np.linalg.norm(psi0)
    if abs(nrm - 1.0) > NORM_TOL:
        raise ValueError(f"initial state not normalized (norm {nrm:.12g})")
    if not allow_boundary:
        touched = {
            m + n for (m, n, i) in initial if initial[(m, n, i)] != 0
        }
        bad = [c for c in touched if h.block_is_boundary(c)]
        if bad:
            raise ValueError(
                f"initial state touches truncation-contaminated blocks c={bad} "
                "(pass allow_boundary=True to override)"
            )

    spec = spectrum(h) if h.hermitian else None
    amps = np.zeros((len(times), len(h.labels)), dtype=complex)
    if spec is not None:
        for blk in spec.blocks:
            idx = [index[lab] for lab in blk.labels]
            coeff = blk.eigenvectors.conj().T @ psi0[idx]
            if not np.any(coeff):
                continue
            phases = np.exp(-1j * np.outer(times, blk.eigenvalues))
            amps[:, idx] += (phases * coeff[None, :]) @ blk.eigenvectors.T
    else:
        # non-hermitian override: direct matrix exponential per time point
        import scipy.linalg

        for it, t in enumerate(times):
            amps[it] = scipy.linalg.expm(-1j * t * h.matrix) @ psi0
    return Trajectory(times=np.asarray(times, dtype=float), labels=h.labels, amplitudes=amps)


# -- transition structure -----------------------------------------------------

ALLOWED_STEPS = {(-1, 1), (1, -1)}
SELECTION_TOL = 1e-12


@dataclass
class TransitionEntry:
    source: tuple[int, int, int]
    target: tuple[int, int, int]
    amplitude: complex
    allowed: bool


def interaction_matrix(params: ModelParams, projected: ProjectedOps) -> np.ndarray:
    if params.variant == "eq1":
        return interaction_eq1(projected, params.lam)
    return interaction_eq2(projected, params)


def transition_table(
    h_int: np.ndarray, labels: list[tuple[int, int, int]]
) -> list[TransitionEntry]:
    """Nonzero interaction couplings, flagging selection-rule violations.

    Allowed transitions move (m, n) -> (m-1, n+1) or (m+1, n-1); anything
    else above 1e-12 is reported with allowed=False.
    """
    entries = []
    for r in range(h_int.shape[0]):
        for c in range(h_int.shape[1]):
            amp = h_int[r, c]
            if abs(amp) <= SELECTION_TOL:
                continue
            (m, n, _), (m2, n2, _) = labels[c], labels[r]
            entries.append(
                TransitionEntry(
                    source=labels[c],
                    target=labels[r],
                    amplitude=complex(amp),
                    allowed=(m2 - m, n2 - n) in ALLOWED_STEPS,
                )
            )
    return entries
