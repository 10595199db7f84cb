import json
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cretanlab.cretan import all_solutions
from cretanlab.designs import menon_family
from cretanlab.errors import NoFeasiblePoint, ParseError, SingularWithinTolerance
from cretanlab.numeric import (
    TEMPLATES,
    SearchConfig,
    SearchTemplate,
    a9_template,
    circ5_template,
    compare_exact_float,
    float_det,
    load_template,
    residual,
    s5d_template,
    search,
)

SB_LEVELS = [1.0, 0.381965, -0.309017]


def det_by_cofactors(M):
    """Laplace expansion in Fraction arithmetic; fine for small orders."""
    M = [[F(x) for x in row] for row in M]
    n = len(M)
    if n == 1:
        return M[0][0]
    total = F(0)
    for j in range(n):
        if M[0][j]:
            minor = [row[:j] + row[j + 1 :] for row in M[1:]]
            total += (-1) ** j * M[0][j] * det_by_cofactors(minor)
    return total


class TestResidual:
    def test_exact_matrix_in_floats(self, sbibd_13):
        for cm in all_solutions(sbibd_13):
            r = residual(cm.to_float())
            assert r.max_residual < 1e-12
            assert r.decimal_places >= 11
            assert r.fitted_omega == pytest.approx(float(cm.weight), rel=1e-14)

    def test_published_circ5_digits(self):
        M = circ5_template().instantiate(SB_LEVELS)
        r = residual(M)
        assert r.fitted_omega == pytest.approx(2.387286, abs=1e-6)
        assert r.max_offdiag < 5e-6
        assert r.decimal_places == 5

    def test_identity(self):
        r = residual(np.eye(4))
        assert r.max_residual == 0
        assert r.fitted_omega == 1

    def test_explicit_omega(self):
        r = residual(np.eye(3), omega=2)
        assert r.max_diag_dev == 1
        # 1 is not below 0.5 * 10**0, so not even the units digit agrees
        assert r.decimal_places == -1

    @pytest.mark.parametrize("r, p", [(4e-6, 5), (5e-6, 4), (0.049, 1), (0.3, 0)])
    def test_decimal_places_boundary(self, r, p):
        M = np.eye(2)
        M[0, 1] = r  # off-diagonal of M M^T equals r
        assert residual(M).max_offdiag == pytest.approx(r)
        assert residual(M).decimal_places == p


class TestFloatDet:
    def test_5_1_0(self, sbibd_5):
        (cm,) = all_solutions(sbibd_5)
        y = F(-2, 3)
        oracle = (1 + 4 * y) * (1 - y) ** 4
        assert oracle == -(F(5, 3) ** 5)
        assert float_det(cm.to_float()) == pytest.approx(float(oracle), rel=1e-12)

    def test_identity(self):
        assert float_det(np.eye(6)) == 1.0

    def test_singular(self):
        M = np.ones((3, 3))
        assert float_det(M) == 0.0
        with pytest.raises(SingularWithinTolerance):
            float_det(M, strict=True)

    @settings(max_examples=50)
    @given(st.lists(st.integers(-5, 5), min_size=16, max_size=16))
    def test_matches_exact_cofactor_oracle(self, xs):
        M = np.array(xs, dtype=float).reshape(4, 4)
        exact = det_by_cofactors(M.tolist())
        assert float_det(M) == pytest.approx(float(exact), abs=1e-9)


class TestCompare:
    @pytest.mark.parametrize("which", ["13", "5", "menon"])
    def test_agreement(self, which, sbibd_13, sbibd_5):
        B = {"13": sbibd_13, "5": sbibd_5, "menon": menon_family(2)}[which]
        for cm in all_solutions(B):
            c = compare_exact_float(cm)
            assert c.passed
            assert c.weight_float == pytest.approx(float(cm.weight), rel=1e-15)
            assert abs(c.lu_det) == pytest.approx(c.det_float, rel=1e-9)

    def test_menon_is_exact_in_floats(self):
        for cm in all_solutions(menon_family(2)):
            if cm.levels[1] == -1:
                assert compare_exact_float(cm).residual.max_residual == 0


class TestTemplates:
    def test_a9_shape(self):
        t = a9_template()
        assert t.order == 9
        assert t.variable_count == 4
        assert t.structure_tag == "bordered-circulant"
        d = t.as_dict()
        assert d["pattern"][0][0] == "-d"
        assert d["pattern"][1][1:] == ["a", "-a", "c", "c", "a", "c", "-a", "-a"]
        counts = np.bincount(t.variables.ravel())
        assert counts.tolist() == [40, 16, 24, 1]

    def test_circ5_is_circulant(self):
        t = circ5_template()
        assert t.as_dict()["pattern"][0] == ["c", "b", "-a", "-a", "b"]

    def test_s5d_first_row(self):
        M = s5d_template().instantiate([1, 0.5, 1 / 3])
        assert M[0].tolist() == pytest.approx([1, -1, -0.5, -1, -1 / 3])

    def test_roundtrip_via_dict(self):
        for make in TEMPLATES.values():
            t = make()
            d = t.as_dict()
            u = load_template(d)
            assert np.array_equal(t.variables, u.variables)
            assert np.array_equal(t.signs, u.signs)

    def test_rejects_non_circulant(self):
        with pytest.raises(ValueError, match="not circulant"):
            SearchTemplate("bad", [[0, 1], [0, 1]], [[1, 1], [1, 1]], "circulant")

    def test_rejects_bad_signs(self):
        with pytest.raises(ValueError):
            SearchTemplate("bad", [[0, 1], [1, 0]], [[1, 2], [1, 1]])

    def test_rejects_unknown_variable(self):
        with pytest.raises(ValueError):
            load_template({"variables": ["a"], "circulant": ["a", "b"]})


class TestConfig:
    def test_file(self, tmp_path):
        f = tmp_path / "search.cfg"
        f.write_text("# run\nrestarts = 4\nmax-iters = 100\npenalty = 10, 1000\ntol = 1e-4\n")
        cfg = SearchConfig.from_file(f)
        assert cfg == SearchConfig(restarts=4, max_iters=100, tol=1e-4, penalty_schedule=(10.0, 1000.0))

    def test_bad_line(self, tmp_path):
        f = tmp_path / "search.cfg"
        f.write_text("restarts 4\n")
        with pytest.raises(ParseError):
            SearchConfig.from_file(f)

    def test_unknown_key(self):
        with pytest.raises(ParseError):
            SearchConfig.from_strings({"colour": "red"})


class TestSearch:
    def test_diag5_finds_minus_two_thirds(self):
        res = search(TEMPLATES["diag5"](), SearchConfig(restarts=4, seed=3))
        assert res.feasible
        assert res.levels[0] == 1.0
        assert res.levels[1] == pytest.approx(-2 / 3, abs=1e-4)
        assert res.abs_det == pytest.approx((5 / 3) ** 5, rel=1e-4)

    def test_deterministic(self):
        cfg = SearchConfig(restarts=3, seed=11)
        a = search(TEMPLATES["diag5"](), cfg).to_json()
        b = search(TEMPLATES["diag5"](), cfg).to_json()
        assert json.dumps(a) == json.dumps(b)

    def test_levels_in_range(self):
        res = search(circ5_template(), SearchConfig(restarts=4, seed=1))
        assert res.levels[0] == 1.0
        assert all(-1 <= x <= 1 for x in res.levels)
        assert len(res.restarts) == 4
        assert len(res.penalty_trace) == 4

    def test_infeasible_template(self):
        # two equal rows: the off-diagonal of M M^T is 1 + a^2 for every a
        t = SearchTemplate("rigid", [[0, 1], [0, 1]], [[1, 1], [1, 1]])
        with pytest.raises(NoFeasiblePoint):
            search(t, SearchConfig(restarts=2, max_iters=200))

    def test_no_free_variables(self):
        res = search(SearchTemplate("one", [[0]], [[1]]), SearchConfig(restarts=1))
        assert res.levels == [1.0]
        assert res.feasible
