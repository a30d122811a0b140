import numpy as np
import pytest

from parajc import carrier as ca
from parajc import green_ansatz as ga


def test_p1_all_grades_one_dimensional(rep_factory):
    _, basis, _ = rep_factory(1, 6, 5)
    for (m, n), d in basis.dims.items():
        assert d == 1, (m, n)
    assert set(basis.dims) == {(m, n) for m in range(6) for n in range(2)}


def test_p2_dimension_pattern(rep_factory):
    _, basis, _ = rep_factory(2, 5, 4)
    dims = basis.dims
    for m in range(5):
        assert dims[(m, 0)] == 1
        assert dims[(m, 2)] == 1
        assert dims[(m, 1)] == (1 if m == 0 else 2)
    assert ca.compare_pattern(basis) is None


def test_p2_total_dim_up_to_m2(rep_factory):
    _, basis, _ = rep_factory(2, 5, 4)
    total = sum(d for (m, n), d in basis.dims.items() if m <= 2)
    assert total == 11  # (1+1+1) + (1+2+1) + (1+2+1)


def test_p2_interior_spanned_by_two_independent_words(ops_factory):
    # oracle: the two words b+f+|0> and f+b+|0> expand over Green components
    # as D+O and D-O, independent exactly for p >= 2
    ops = ops_factory(2, 4)
    vac = ops.vacuum()
    w1 = ops.b_plus @ (ops.f_plus @ vac)
    w2 = ops.f_plus @ (ops.b_plus @ vac)
    stacked = np.column_stack([w1, w2])
    assert np.linalg.matrix_rank(stacked, tol=1e-8) == 2
    # and at p=1 the same two words are parallel
    ops1 = ops_factory(1, 4)
    vac1 = ops1.vacuum()
    u1 = ops1.b_plus @ (ops1.f_plus @ vac1)
    u2 = ops1.f_plus @ (ops1.b_plus @ vac1)
    assert np.linalg.matrix_rank(np.column_stack([u1, u2]), tol=1e-8) == 1


def test_orthonormal_and_graded(rep_factory):
    ops, basis, _ = rep_factory(3, 4, 3)
    assert basis.gram_deviation() <= 1e-12
    for (m, n), cols in basis.grades.items():
        assert np.max(np.abs(ops.n_b @ cols - m * cols)) <= 1e-12
        assert np.max(np.abs(ops.n_f @ cols - n * cols)) <= 1e-12


def test_extraction_parameter_validation(ops_factory):
    ops = ops_factory(1, 3)
    with pytest.raises(ValueError):
        ca.extract_carrier(ops, M_keep=3)  # must be <= M-1
    with pytest.raises(ValueError):
        ca.extract_carrier(ops, rank_tol=-1.0)


def test_rank_ambiguity_guard(ops_factory):
    # a rank_tol of order 1 puts genuine unit-size residuals into the band
    ops = ops_factory(2, 3)
    with pytest.raises(ca.RankAmbiguityError):
        ca.extract_carrier(ops, rank_tol=0.5)


class TestProjection:
    def test_f_plus_absent_at_top_fermion_level(self, rep_factory):
        _, basis, proj = rep_factory(2, 4, 3)
        for m in range(4):
            assert proj.block("f+", m, 2) is None

    def test_p1_boson_blocks_are_sqrt_m(self, rep_factory):
        _, _, proj = rep_factory(1, 6, 5)
        for m in range(5):
            block = proj.block("b+", m, 0)
            assert block.shape == (1, 1)
            assert block[0, 0] == pytest.approx(np.sqrt(m + 1), abs=1e-12)

    def test_interior_adjointness(self, rep_factory):
        _, basis, proj = rep_factory(2, 5, 4)
        for (m, n) in basis.dims:
            if m + 1 < proj.M_keep and (m + 1, n) in basis.dims:
                up = proj.block("b+", m, n)
                down = proj.block("b-", m + 1, n)
                assert up is not None and down is not None
                assert np.max(np.abs(down - up.conj().T)) <= 1e-12
            if n + 1 <= proj.p and (m, n + 1) in basis.dims:
                up = proj.block("f+", m, n)
                down = proj.block("f-", m, n + 1)
                if up is not None:
                    assert np.max(np.abs(down - up.conj().T)) <= 1e-12

    def test_boundary_flag(self, rep_factory):
        _, _, proj = rep_factory(2, 4, 3)
        assert proj.is_boundary("b+", 2, 0)  # maps into m = M_keep
        assert proj.is_boundary("b-", 3, 0)
        assert not proj.is_boundary("b+", 0, 0)


def test_completeness_no_leakage(rep_factory):
    # b+/f+ images of interior basis vectors stay inside the extracted space
    ops, basis, _ = rep_factory(2, 4, 3)
    all_cols = np.hstack([basis.grades[g] for g in sorted(basis.grades)])
    proj_mat = all_cols @ all_cols.conj().T
    for (m, n), cols in basis.grades.items():
        if m < basis.M_keep:
            img = ops.b_plus @ cols
            assert np.max(np.abs(img - proj_mat @ img)) <= 1e-10
        img = ops.f_plus @ cols
        assert np.max(np.abs(img - proj_mat @ img)) <= 1e-10


class TestRoundTrip:
    def test_save_load_identical(self, rep_factory, tmp_path):
        _, basis, proj = rep_factory(2, 4, 3)
        path = tmp_path / "rep.pbf"
        ca.save_rep(basis, proj, path)
        basis2, proj2 = ca.load_rep(path)
        assert basis2.dims == basis.dims
        for g in basis.grades:
            assert np.array_equal(basis2.grades[g], basis.grades[g])
        assert set(proj2.blocks) == set(proj.blocks)
        for k in proj.blocks:
            assert np.array_equal(proj2.blocks[k], proj.blocks[k])
        # serialization is deterministic, byte for byte
        assert ca.rep_to_text(basis2, proj2) == ca.rep_to_text(basis, proj)

    def test_bad_magic_rejected(self, rep_factory, tmp_path):
        _, basis, proj = rep_factory(1, 3, 2)
        text = ca.rep_to_text(basis, proj)
        with pytest.raises(ca.RepFormatError, match="magic"):
            ca.rep_from_text(text.replace("PBF-REP v1", "PBF-REP v9", 1))

    def test_corrupted_payload_rejected(self, rep_factory, tmp_path):
        _, basis, proj = rep_factory(1, 3, 2)
        lines = ca.rep_to_text(basis, proj).splitlines()
        for i, line in enumerate(lines):
            if line.startswith("OP "):
                lines[i + 1] = "0 0 99 0"
                break
        with pytest.raises(ca.RepFormatError, match="checksum"):
            ca.rep_from_text("\n".join(lines) + "\n")

    def test_grading_violation_rejected_even_with_valid_checksum(self, rep_factory):
        import hashlib

        _, basis, proj = rep_factory(1, 3, 2)
        lines = ca.rep_to_text(basis, proj).splitlines()[:-1]
        for i, line in enumerate(lines):
            if line.startswith("OP b+ "):
                parts = line.split()
                parts[5] = str(int(parts[5]) + 1)  # break the declared shift
                lines[i] = " ".join(parts)
                break
        body = "\n".join(lines) + "\n"
        digest = hashlib.sha256(body.encode()).hexdigest()
        with pytest.raises(ca.RepFormatError, match="grading"):
            ca.rep_from_text(body + f"END {digest}\n")
