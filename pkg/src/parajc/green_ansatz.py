"""Order-p paraboson/parafermion generators built from Green components.

The four generators b+, b-, f+, f- act on the ambient tensor space of
`tensor_core.ModeLayout`.  Each is a sum over p Green components: an ordinary
ladder operator on its own slot, dressed with a Klein parity string over the
slots of the preceding components.  The string recipe

  * boson component alpha: parity over boson AND fermion slots of gamma < alpha
  * fermion component alpha: parity over boson slots of gamma < alpha only

makes distinct-component boson pairs anticommute, distinct-component fermion
pairs commute, same-component mixed pairs commute, and distinct-component
mixed pairs anticommute.  None of this is trusted: `check_statistics`,
`check_trilinear` and `check_vacuum` verify it all numerically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import tensor_core as tc

DEFAULT_DIM_CEILING = 2_000_000


@dataclass
class ParaOperators:
    """The four generators, their Green components, and the number operators."""

    layout: tc.ModeLayout
    b_plus: sp.csr_matrix
    b_minus: sp.csr_matrix
    f_plus: sp.csr_matrix
    f_minus: sp.csr_matrix
    n_b: sp.csr_matrix
    n_f: sp.csr_matrix
    # dressed per-component operators, kept so statistics checks can run
    b_plus_parts: list[sp.csr_matrix] = field(repr=False, default_factory=list)
    f_plus_parts: list[sp.csr_matrix] = field(repr=False, default_factory=list)

    @property
    def order(self) -> int:
        return self.layout.p

    def vacuum(self) -> np.ndarray:
        """All-empty basis state (index 0 under the fixed slot ordering)."""
        v = np.zeros(self.layout.ambient_dim, dtype=complex)
        v[0] = 1.0
        return v

    def safe_projector(self, max_total_boson: int) -> sp.csr_matrix:
        """Projector onto total boson occupation <= max_total_boson.

        Identities that hold in the untruncated algebra hold exactly when
        sandwiched between these projectors, provided the operator words are
        short enough that no intermediate state exceeds the cutoff.
        """
        layout = self.layout
        total = np.zeros(layout.ambient_dim, dtype=np.int64)
        for alpha in range(layout.p):
            total += layout.occupations(layout.boson_slot(alpha))
        keep = (total <= max_total_boson).astype(complex)
        return sp.csr_matrix(sp.diags(keep))


def build_para_ops(
    p: int,
    M: int,
    dim_ceiling: int = DEFAULT_DIM_CEILING,
    _drop_fermion_klein: int | None = None,
) -> ParaOperators:
    """Construct the order-p generators on the (M-truncated) ambient space.

    `_drop_fermion_klein` is a fault-injection hook for the test harness: it
    replaces the Klein string of one fermion component with the identity,
    which must make the mixed statistics and trilinear relations fail loudly.
    """
    if p < 1:
        raise ValueError(f"order p must be >= 1, got {p}")
    if M < 2:
        raise ValueError(f"boson cutoff M must be >= 2, got {M}")
    layout = tc.ModeLayout(p=p, M=M)
    if layout.ambient_dim > dim_ceiling:
        raise ValueError(
            f"ambient dimension (M+1)^p * 2^p = {layout.ambient_dim} exceeds "
            f"the ceiling {dim_ceiling} (p={p}, M={M}); raise dim_ceiling "
            "explicitly if this size is intended"
        )

    b_raise_1, b_lower_1 = tc.make_boson_mode(M)
    f_raise_1, f_lower_1 = tc.make_fermion_mode()

    b_plus_parts, f_plus_parts = [], []
    for alpha in range(p):
        # boson string: all slots of preceding components
        b_string_slots = {layout.boson_slot(g) for g in range(alpha)} | {
            layout.fermion_slot(g) for g in range(alpha)
        }
        kb = tc.parity_string(b_string_slots, layout)
        b_plus_parts.append(
            tc.multiply(kb, tc.embed(b_raise_1, layout.boson_slot(alpha), layout))
        )
        # fermion string: boson slots of preceding components only
        f_string_slots = {layout.boson_slot(g) for g in range(alpha)}
        if _drop_fermion_klein == alpha:
            f_string_slots = set()
        kf = tc.parity_string(f_string_slots, layout)
        f_plus_parts.append(
            tc.multiply(kf, tc.embed(f_raise_1, layout.fermion_slot(alpha), layout))
        )

    b_plus = b_plus_parts[0]
    f_plus = f_plus_parts[0]
    for part in b_plus_parts[1:]:
        b_plus = tc.add(b_plus, part)
    for part in f_plus_parts[1:]:
        f_plus = tc.add(f_plus, part)

    n_b = tc.occupation_diag({layout.boson_slot(a) for a in range(p)}, layout)
    n_f = tc.occupation_diag({layout.fermion_slot(a) for a in range(p)}, layout)

    return ParaOperators(
        layout=layout,
        b_plus=b_plus,
        b_minus=tc.adjoint(b_plus),
        f_plus=f_plus,
        f_minus=tc.adjoint(f_plus),
        n_b=n_b,
        n_f=n_f,
        b_plus_parts=b_plus_parts,
        f_plus_parts=f_plus_parts,
    )


# -- relation checking --------------------------------------------------------

@dataclass
class RelationCheck:
    family: str
    detail: str
    residual: float
    passed: bool


@dataclass
class RelationReport:
    tol: float
    checks: list[RelationCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def failures(self) -> list[RelationCheck]:
        return [c for c in self.checks if not c.passed]


def check_statistics(ops: ParaOperators, tol: float = 1e-12) -> RelationReport:
    """Pairwise (anti)commutators of the dressed Green components.

    Expected, all exactly zero:
      {b_alpha, b_beta} for alpha != beta   (bosons anticommute across components)
      [f_alpha, f_beta] for alpha != beta   (fermions commute across components)
      [b_alpha, f_alpha]                    (same-component mixed pairs commute)
      {b_alpha, f_beta} for alpha != beta   (mixed pairs anticommute)
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    p = ops.order
    checks = []

    def record(family, detail, mat):
        r = tc.max_abs_entry(mat)
        checks.append(RelationCheck(family, detail, r, r <= tol))

    bp, fp = ops.b_plus_parts, ops.f_plus_parts
    bm = [tc.adjoint(x) for x in bp]
    fm = [tc.adjoint(x) for x in fp]
    for a in range(p):
        for b in range(p):
            for xa, sa in ((bp, "+"), (bm, "-")):
                for xb, sb in ((bp, "+"), (bm, "-")):
                    if a < b:
                        record("bb-anticommute", f"b{sa}_{a},b{sb}_{b}",
                               tc.anticommutator(xa[a], xb[b]))
            for fa, sa in ((fp, "+"), (fm, "-")):
                for fb, sb in ((fp, "+"), (fm, "-")):
                    if a < b:
                        record("ff-commute", f"f{sa}_{a},f{sb}_{b}",
                               tc.commutator(fa[a], fb[b]))
            for xa, sa in ((bp, "+"), (bm, "-")):
                for fb, sb in ((fp, "+"), (fm, "-")):
                    if a == b:
                        record("bf-same-commute", f"b{sa}_{a},f{sb}_{b}",
                               tc.commutator(xa[a], fb[b]))
                    else:
                        record("bf-cross-anticommute", f"b{sa}_{a},f{sb}_{b}",
                               tc.anticommutator(xa[a], fb[b]))
    return RelationReport(tol=tol, checks=checks)


_SIGNS = (1, -1)
_SIGN_CHAR = {1: "+", -1: "-"}


def check_trilinear(ops: ParaOperators, tol: float = 1e-10) -> RelationReport:
    """Residuals of the six trilinear relation families, all sign choices.

    With xi, eta, eps in {+1, -1}, [.,.] the commutator, {.,.} the
    anticommutator, and b^+1 = b+, b^-1 = b-:

      R1: [{b^xi, b^eta}, b^eps] = (eps-xi) b^eta + (eps-eta) b^xi
      R2: [[f^xi, f^eta], f^eps] = (eps-eta)^2/2 f^xi - (eps-xi)^2/2 f^eta
      R3: [{b^xi, b^eta}, f^eps] = 0
      R4: [[f^xi, f^eta], b^eps] = 0
      R5: [{b^xi, f^eta}, b^eps] = (eps-xi) f^eta
      R6: {{b^xi, f^eta}, f^eps} = (eps-eta)^2/2 b^xi

    Residuals are max absolute entries of LHS-RHS sandwiched between
    projectors onto total boson occupation <= M-2, where the truncation
    cannot reach (every operator word here is at most trilinear).
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if ops.layout.M < 3:
        raise ValueError("trilinear checks need M >= 3 for a truncation-safe region")
    b = {1: ops.b_plus, -1: ops.b_minus}
    f = {1: ops.f_plus, -1: ops.f_minus}
    proj = ops.safe_projector(ops.layout.M - 2)
    zero = tc.scale(0.0, ops.b_plus)

    def lincomb(c1, a1, c2=0.0, a2=None):
        out = tc.scale(c1, a1)
        if a2 is not None:
            out = tc.add(out, tc.scale(c2, a2))
        return out

    families = {
        "R1": lambda x, e, s: (
            tc.commutator(tc.anticommutator(b[x], b[e]), b[s]),
            lincomb(s - x, b[e], s - e, b[x]),
        ),
        "R2": lambda x, e, s: (
            tc.commutator(tc.commutator(f[x], f[e]), f[s]),
            lincomb((s - e) ** 2 / 2, f[x], -((s - x) ** 2) / 2, f[e]),
        ),
        "R3": lambda x, e, s: (
            tc.commutator(tc.anticommutator(b[x], b[e]), f[s]),
            zero,
        ),
        "R4": lambda x, e, s: (
            tc.commutator(tc.commutator(f[x], f[e]), b[s]),
            zero,
        ),
        "R5": lambda x, e, s: (
            tc.commutator(tc.anticommutator(b[x], f[e]), b[s]),
            lincomb(s - x, f[e]),
        ),
        "R6": lambda x, e, s: (
            tc.anticommutator(tc.anticommutator(b[x], f[e]), f[s]),
            lincomb((s - e) ** 2 / 2, b[x]),
        ),
    }

    checks = []
    for name, make in families.items():
        for xi in _SIGNS:
            for eta in _SIGNS:
                for eps in _SIGNS:
                    lhs, rhs = make(xi, eta, eps)
                    diff = tc.multiply(proj, tc.multiply(tc.add(lhs, tc.scale(-1.0, rhs)), proj))
                    r = tc.max_abs_entry(diff)
                    detail = "".join(_SIGN_CHAR[s] for s in (xi, eta, eps))
                    checks.append(RelationCheck(name, detail, r, r <= tol))
    return RelationReport(tol=tol, checks=checks)


def check_vacuum(ops: ParaOperators) -> dict[str, float]:
    """Vacuum conditions of the order-p Fock-like module.

    Expected: the annihilator norms and mixed bilinear norms vanish, and the
    vacuum bilinears <0|b-b+|0> and <0|f-f+|0> both equal p.
    """
    vac = ops.vacuum()
    return {
        "norm_b_minus_vac": float(np.linalg.norm(tc.apply(ops.b_minus, vac))),
        "norm_f_minus_vac": float(np.linalg.norm(tc.apply(ops.f_minus, vac))),
        "vev_b_minus_b_plus": float(
            np.real(np.vdot(vac, tc.apply(ops.b_minus, tc.apply(ops.b_plus, vac))))
        ),
        "vev_f_minus_f_plus": float(
            np.real(np.vdot(vac, tc.apply(ops.f_minus, tc.apply(ops.f_plus, vac))))
        ),
        "norm_b_minus_f_plus_vac": float(
            np.linalg.norm(tc.apply(ops.b_minus, tc.apply(ops.f_plus, vac)))
        ),
        "norm_f_minus_b_plus_vac": float(
            np.linalg.norm(tc.apply(ops.f_minus, tc.apply(ops.b_plus, vac)))
        ),
    }


def number_identity_residuals(ops: ParaOperators) -> dict[str, float]:
    """Residuals of N_b = {b+,b-}/2 - p/2 and N_f = [f+,f-]/2 + p/2.

    Checked on total boson occupation < M, where the bilinears are exact.
    """
    layout = ops.layout
    proj = ops.safe_projector(layout.M - 1)
    half_p = layout.p / 2.0
    ident = tc.identity(layout.ambient_dim)
    nb_bilinear = tc.add(
        tc.scale(0.5, tc.anticommutator(ops.b_plus, ops.b_minus)),
        tc.scale(-half_p, ident),
    )
    nf_bilinear = tc.add(
        tc.scale(0.5, tc.commutator(ops.f_plus, ops.f_minus)),
        tc.scale(half_p, ident),
    )
    return {
        "n_b": tc.max_abs_entry(
            tc.multiply(proj, tc.multiply(tc.add(nb_bilinear, tc.scale(-1.0, ops.n_b)), proj))
        ),
        "n_f": tc.max_abs_entry(
            tc.multiply(proj, tc.multiply(tc.add(nf_bilinear, tc.scale(-1.0, ops.n_f)), proj))
        ),
    }
