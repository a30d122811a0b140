"""Cyclic Fock-like carrier space: extraction, grading, projection, persistence.

The carrier space is generated from the vacuum by repeated application of b+
and f+.  Every basis vector is a joint eigenvector of the number operators,
so the space splits into grades V_{m,n}; the extraction walks grades in a
fixed order and orthonormalizes within each grade, recording the dimension
table d_{m,n}.  The four generators are then projected onto the graded basis
blockwise, and the whole representation round-trips through a line-oriented
text file (format PBF-REP v1).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import tensor_core as tc
from .green_ansatz import ParaOperators

# grade shift of each generator acting on V_{m,n}
SHIFTS = {"b+": (1, 0), "b-": (-1, 0), "f+": (0, 1), "f-": (0, -1)}
OP_NAMES = ("b+", "b-", "f+", "f-")

GRADING_TOL = 1e-12
ORTHO_TOL = 1e-12


class RankAmbiguityError(RuntimeError):
    """A Gram-Schmidt residual fell inside the decade-wide ambiguity band."""


class RepFormatError(ValueError):
    """Representation file is malformed, corrupted, or of an unknown version."""


@dataclass
class CarrierBasis:
    p: int
    M: int
    M_keep: int
    ambient_dim: int
    # grade (m, n) -> (ambient_dim, d_{m,n}) array of orthonormal columns
    grades: dict[tuple[int, int], np.ndarray] = field(repr=False, default_factory=dict)

    @property
    def dims(self) -> dict[tuple[int, int], int]:
        return {g: v.shape[1] for g, v in self.grades.items()}

    @property
    def labels(self) -> list[tuple[int, int, int]]:
        """Global basis labels (m, n, i), sorted."""
        out = []
        for (m, n) in sorted(self.grades):
            out.extend((m, n, i) for i in range(self.grades[(m, n)].shape[1]))
        return out

    @property
    def total_dim(self) -> int:
        return sum(v.shape[1] for v in self.grades.values())

    def gram_deviation(self) -> float:
        """Max |<v_i|v_j> - delta_ij| across the whole basis."""
        cols = np.hstack([self.grades[g] for g in sorted(self.grades)])
        gram = cols.conj().T @ cols
        return float(np.max(np.abs(gram - np.eye(gram.shape[0]))))


@dataclass
class ProjectedOps:
    p: int
    M: int
    M_keep: int
    dims: dict[tuple[int, int], int]
    # (op name, source grade) -> block matrix of shape (d_target, d_source);
    # target grade is source + SHIFTS[name].  Missing key = exactly absent block.
    blocks: dict[tuple[str, tuple[int, int]], np.ndarray] = field(repr=False, default_factory=dict)

    def block(self, name: str, m: int, n: int) -> np.ndarray | None:
        return self.blocks.get((name, (m, n)))

    def is_boundary(self, name: str, m: int, n: int) -> bool:
        """True when the block touches the m = M_keep truncation boundary."""
        dm, dn = SHIFTS[name]
        return m == self.M_keep or m + dm == self.M_keep


def _grade_order(M_keep: int, p: int) -> list[tuple[int, int]]:
    grades = [(m, n) for m in range(M_keep + 1) for n in range(p + 1)]
    grades.sort(key=lambda g: (g[0] + g[1], g[0]))
    return grades


def extract_carrier(
    ops: ParaOperators,
    M_keep: int | None = None,
    rank_tol: float = 1e-8,
) -> CarrierBasis:
    """Breadth-first closure of the cyclic module generated from the vacuum.

    Grades are processed lexicographically by (m+n, m); within a grade,
    candidates are b+ images of V_{m-1,n} before f+ images of V_{m,n-1},
    parent index ascending.  Each candidate is normalized, orthogonalized
    against the already-accepted vectors of the grade (modified Gram-Schmidt
    with one re-orthogonalization pass) and accepted iff its residual norm
    exceeds rank_tol.  A residual inside [rank_tol/10, rank_tol*10] aborts:
    the genuine Gram values here are well-separated rationals, so ambiguity
    signals a bug rather than a borderline case.
    """
    layout = ops.layout
    p = layout.p
    if M_keep is None:
        M_keep = layout.M - 1
    if M_keep > layout.M - 1:
        raise ValueError(f"M_keep={M_keep} must be <= M-1 = {layout.M - 1}")
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")

    grades: dict[tuple[int, int], list[np.ndarray]] = {}
    grades[(0, 0)] = [ops.vacuum()]

    for (m, n) in _grade_order(M_keep, p):
        if (m, n) == (0, 0):
            continue
        accepted: list[np.ndarray] = []
        candidates: list[np.ndarray] = []
        if (m - 1, n) in grades:
            for parent in grades[(m - 1, n)]:
                candidates.append(tc.apply(ops.b_plus, parent))
        if (m, n - 1) in grades:
            for parent in grades[(m, n - 1)]:
                candidates.append(tc.apply(ops.f_plus, parent))

        for cand in candidates:
            nrm = np.linalg.norm(cand)
            residual = 0.0 if nrm <= rank_tol else None
            if residual is None:
                w = cand / nrm
                for _ in range(2):  # MGS + one re-orthogonalization pass
                    for v in accepted:
                        w = w - v * np.vdot(v, w)
                residual = float(np.linalg.norm(w))
            if rank_tol / 10 <= residual <= rank_tol * 10:
                raise RankAmbiguityError(
                    f"grade ({m},{n}): candidate residual {residual:.3e} lies in "
                    f"the ambiguity band [{rank_tol / 10:.1e}, {rank_tol * 10:.1e}]; "
                    "refusing to decide the rank"
                )
            if residual > rank_tol:
                accepted.append(w / residual)
        if accepted:
            grades[(m, n)] = accepted

    basis = CarrierBasis(
        p=p,
        M=layout.M,
        M_keep=M_keep,
        ambient_dim=layout.ambient_dim,
        grades={g: np.column_stack(vs) for g, vs in grades.items()},
    )
    _validate_grading(ops, basis)
    return basis


def _validate_grading(ops: ParaOperators, basis: CarrierBasis):
    """Every basis vector must be an exact (m, n) eigenvector of N_b, N_f."""
    for (m, n), cols in basis.grades.items():
        rb = np.max(np.abs(ops.n_b @ cols - m * cols))
        rf = np.max(np.abs(ops.n_f @ cols - n * cols))
        if rb > GRADING_TOL or rf > GRADING_TOL:
            raise RuntimeError(
                f"grade ({m},{n}) not an exact number-operator eigenspace "
                f"(residuals {rb:.2e}, {rf:.2e})"
            )


def project_ops(ops: ParaOperators, basis: CarrierBasis) -> ProjectedOps:
    """Blockwise matrix elements of the generators on the graded basis.

    Each generator maps V_{m,n} into V at exactly one shifted grade; any
    leakage into other grades (beyond the m = M_keep truncation boundary)
    aborts with diagnostics.  Blocks with max entry below 1e-12 are absent.
    """
    gen = {"b+": ops.b_plus, "b-": ops.b_minus, "f+": ops.f_plus, "f-": ops.f_minus}
    blocks: dict[tuple[str, tuple[int, int]], np.ndarray] = {}
    for name in OP_NAMES:
        dm, dn = SHIFTS[name]
        for (m, n), src in sorted(basis.grades.items()):
            tgt_grade = (m + dm, n + dn)
            image = gen[name] @ src
            tgt = basis.grades.get(tgt_grade)
            if tgt is None:
                # either annihilated (edge of the grid) or beyond M_keep
                leak = float(np.max(np.abs(image))) if image.size else 0.0
                if leak > GRADING_TOL and not (m + dm > basis.M_keep):
                    raise RuntimeError(
                        f"{name} maps grade ({m},{n}) outside the carrier space "
                        f"(leakage {leak:.2e}) although ({tgt_grade}) is in range"
                    )
                continue
            block = tgt.conj().T @ image
            leak = float(np.max(np.abs(image - tgt @ block)))
            if leak > 1e-10:
                raise RuntimeError(
                    f"{name} out of grade ({m},{n}): leakage {leak:.2e} beyond "
                    f"designated target {tgt_grade}"
                )
            if np.max(np.abs(block)) >= 1e-12:
                blocks[(name, (m, n))] = block
    return ProjectedOps(
        p=basis.p, M=basis.M, M_keep=basis.M_keep, dims=basis.dims, blocks=blocks
    )


# -- dimension pattern --------------------------------------------------------

def expected_dim(p: int, m: int, n: int) -> int:
    """Dimension of V_{m,n}: 2 in the interior, 1 on the m=0 / n=0 / n=p edges."""
    if m == 0 or n == 0 or n == p:
        return 1
    return 2


def compare_pattern(basis: CarrierBasis) -> tuple[int, int, int, int] | None:
    """First cell (m, n, expected, got) violating the dimension pattern, else None."""
    for (m, n) in _grade_order(basis.M_keep, basis.p):
        got = basis.dims.get((m, n), 0)
        want = expected_dim(basis.p, m, n)
        if got != want:
            return (m, n, want, got)
    return None


def dims_table(basis: CarrierBasis) -> str:
    lines = ["  m   n   d"]
    for (m, n) in sorted(basis.dims):
        lines.append(f"{m:3d} {n:3d} {basis.dims[(m, n)]:3d}")
    return "\n".join(lines)


# -- persistence --------------------------------------------------------------

_MAGIC = "PBF-REP v1"


def _fmt(x: float) -> str:
    return format(x, ".17g")


def rep_to_text(basis: CarrierBasis, projected: ProjectedOps) -> str:
    lines = [_MAGIC]
    lines.append(
        f"p={basis.p} M={basis.M} Mkeep={basis.M_keep} ambient={basis.ambient_dim}"
    )
    lines.append("DIMS")
    for (m, n) in _grade_order(basis.M_keep, basis.p):
        if (m, n) in basis.dims:
            lines.append(f"{m} {n} {basis.dims[(m, n)]}")
    lines.append("BASIS")
    for (m, n) in _grade_order(basis.M_keep, basis.p):
        cols = basis.grades.get((m, n))
        if cols is None:
            continue
        for i in range(cols.shape[1]):
            (nz,) = np.nonzero(cols[:, i])
            for k in nz:
                c = cols[k, i]
                lines.append(f"{m} {n} {i} {k} {_fmt(c.real)} {_fmt(c.imag)}")
    for name in OP_NAMES:
        dm, dn = SHIFTS[name]
        for (m, n) in _grade_order(basis.M_keep, basis.p):
            block = projected.blocks.get((name, (m, n)))
            if block is None:
                continue
            lines.append(f"OP {name} {m} {n} -> {m + dm} {n + dn}")
            for r in range(block.shape[0]):
                for c in range(block.shape[1]):
                    v = block[r, c]
                    if v != 0:
                        lines.append(f"{r} {c} {_fmt(v.real)} {_fmt(v.imag)}")
    body = "\n".join(lines) + "\n"
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    return body + f"END {digest}\n"


def save_rep(basis: CarrierBasis, projected: ProjectedOps, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(rep_to_text(basis, projected))


def load_rep(path) -> tuple[CarrierBasis, ProjectedOps]:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return rep_from_text(text)


def rep_from_text(text: str) -> tuple[CarrierBasis, ProjectedOps]:
    lines = text.splitlines()
    if not lines or lines[0] != _MAGIC:
        raise RepFormatError(f"bad or missing header magic (expected '{_MAGIC}')")
    if not lines[-1].startswith("END "):
        raise RepFormatError("missing END checksum line")
    body = "\n".join(lines[:-1]) + "\n"
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    claimed = lines[-1][4:].strip()
    if claimed != digest:
        raise RepFormatError("checksum mismatch: file corrupted")

    try:
        header = dict(kv.split("=") for kv in lines[1].split())
        p = int(header["p"])
        M = int(header["M"])
        M_keep = int(header["Mkeep"])
        ambient = int(header["ambient"])
    except (KeyError, ValueError, IndexError) as exc:
        raise RepFormatError(f"malformed parameter line: {lines[1]!r}") from exc

    if lines[2] != "DIMS":
        raise RepFormatError("expected DIMS section")
    i = 3
    dims: dict[tuple[int, int], int] = {}
    while i < len(lines) and lines[i] != "BASIS":
        m, n, d = (int(x) for x in lines[i].split())
        dims[(m, n)] = d
        i += 1
    if i >= len(lines):
        raise RepFormatError("expected BASIS section")
    i += 1

    grades = {g: np.zeros((ambient, d), dtype=complex) for g, d in dims.items()}
    while i < len(lines) - 1 and not lines[i].startswith("OP "):
        parts = lines[i].split()
        if len(parts) != 6:
            raise RepFormatError(f"malformed BASIS line: {lines[i]!r}")
        m, n, idx, amb = int(parts[0]), int(parts[1]), int(parts[2]), int(parts[3])
        grades[(m, n)][amb, idx] = complex(float(parts[4]), float(parts[5]))
        i += 1

    blocks: dict[tuple[str, tuple[int, int]], np.ndarray] = {}
    while i < len(lines) - 1:
        parts = lines[i].split()
        if parts[0] != "OP" or len(parts) != 7 or parts[4] != "->":
            raise RepFormatError(f"unexpected section: {lines[i]!r}")
        name = parts[1]
        if name not in SHIFTS:
            raise RepFormatError(f"unknown operator name {name!r}")
        m, n = int(parts[2]), int(parts[3])
        m2, n2 = int(parts[5]), int(parts[6])
        dm, dn = SHIFTS[name]
        if (m2, n2) != (m + dm, n + dn):
            raise RepFormatError(
                f"grading violation in file: {name} declared ({m},{n})->({m2},{n2})"
            )
        if (m, n) not in dims or (m2, n2) not in dims:
            raise RepFormatError(f"block references unknown grade: {lines[i]!r}")
        block = np.zeros((dims[(m2, n2)], dims[(m, n)]), dtype=complex)
        i += 1
        while i < len(lines) - 1 and not lines[i].startswith("OP "):
            parts = lines[i].split()
            if len(parts) != 4:
                raise RepFormatError(f"malformed block entry: {lines[i]!r}")
            r, c = int(parts[0]), int(parts[1])
            block[r, c] = complex(float(parts[2]), float(parts[3]))
            i += 1
        blocks[(name, (m, n))] = block

    basis = CarrierBasis(p=p, M=M, M_keep=M_keep, ambient_dim=ambient, grades=grades)
    if basis.gram_deviation() > ORTHO_TOL:
        raise RepFormatError(
            f"loaded basis not orthonormal (deviation {basis.gram_deviation():.2e})"
        )
    projected = ProjectedOps(p=p, M=M, M_keep=M_keep, dims=dims, blocks=blocks)
    return basis, projected
