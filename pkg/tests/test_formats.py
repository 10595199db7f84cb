import json
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cretanlab.cretan import all_solutions
from cretanlab.designs import menon_family
from cretanlab.errors import ParseError
from cretanlab.formats import (
    bundle_to_json,
    cretan_from_json,
    cretan_to_json,
    design_from_json,
    design_to_json,
    matrix_to_csv,
    read_document,
    write_json,
)
from cretanlab.numeric import SearchConfig, TEMPLATES, search
from cretanlab.portrait import PortraitSpec, gray_level, render_pgm
from cretanlab.qfield import QuadExt


def parse_pgm(data: bytes):
    magic, dims, maxval, rest = data.split(b"\n", 3)
    w, h = map(int, dims.split())
    return magic, w, h, int(maxval), np.frombuffer(rest, dtype=np.uint8).reshape(h, w)


class TestJson:
    def test_cretan_roundtrip(self, sbibd_13, sbibd_7, sbibd_5):
        for B in (sbibd_13, sbibd_7, sbibd_5, menon_family(2)):
            for cm in all_solutions(B):
                back = cretan_from_json(json.loads(json.dumps(cretan_to_json(cm))))
                assert back == cm

    def test_design_roundtrip(self, sbibd_13):
        assert design_from_json(design_to_json(sbibd_13)) == sbibd_13

    def test_bundle_via_file(self, tmp_path, sbibd_13):
        found = all_solutions(sbibd_13)
        path = tmp_path / "b.json"
        write_json(bundle_to_json(sbibd_13, found), path)
        assert read_document(path) == found
        doc = json.loads(path.read_text())
        assert doc["classification"] == "both-original"
        assert {m["omega"]["exact"] for m in doc["matrices"]} == {"7 + 3/2*sqrt(3)", "7 - 3/2*sqrt(3)"}

    def test_search_result_readable(self, tmp_path):
        res = search(TEMPLATES["diag5"](), SearchConfig(restarts=2))
        path = tmp_path / "s.json"
        write_json(res.to_json(), path)
        (M,) = read_document(path)
        assert np.array_equal(M, res.matrix)

    def test_float_only_levels(self, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps({"levels": [{"float": 1.0}, {"float": -0.5}], "entries": [[0, 1], [1, 0]]}))
        (M,) = read_document(path)
        assert M.tolist() == [[1.0, -0.5], [-0.5, 1.0]]

    @pytest.mark.parametrize(
        "text",
        ["{not json", '{"kind": "mystery"}', '{"kind": "cretan-matrix", "levels": [{"exact": "1"}], "entries": [[0, 1]]}'],
    )
    def test_malformed(self, tmp_path, text):
        path = tmp_path / "x.json"
        path.write_text(text)
        with pytest.raises(ParseError):
            read_document(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            read_document(tmp_path / "nope.json")


class TestCsv:
    @given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=9, max_size=9))
    def test_roundtrip_bit_exact(self, xs):
        M = np.array(xs).reshape(3, 3)
        assert np.array_equal(_csv_back(M), M)

    def test_not_square(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1,2\n3\n")
        with pytest.raises(ParseError):
            read_document(path)

    def test_non_numeric(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1,x\n3,4\n")
        with pytest.raises(ParseError) as info:
            read_document(path)
        assert info.value.lineno == 1


def _csv_back(M):
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as d:
        path = Path(d) / "m.csv"
        path.write_text(matrix_to_csv(M))
        (back,) = read_document(path)
    return back


class TestPortrait:
    @pytest.mark.parametrize(
        "value, gray",
        [(1, 255), (-1, 0), (0, 128), (F(-2, 3), 42), (QuadExt(F(-2, 3)), 42), (0.0, 128), (-2.0, 0), (5, 255)],
    )
    def test_gray_level(self, value, gray):
        # oracle: 255 (y + 1) / 2 in Fraction, rounded half to even
        assert gray_level(value) == gray

    def test_half_to_even_oracle(self):
        for num in range(-30, 31):
            y = F(num, 30)
            assert gray_level(y) == round(F(255) * (y + 1) / 2)

    def test_irrational_level(self):
        y = QuadExt(-1, F(1, 2), 2)  # about -0.2929
        assert gray_level(y) == round(255 * (float(y) + 1) / 2)

    def test_render_5_1_0(self, sbibd_5):
        (cm,) = all_solutions(sbibd_5)
        magic, w, h, maxval, img = parse_pgm(render_pgm(cm.entries, PortraitSpec(3)))
        assert (magic, w, h, maxval) == (b"P5", 15, 15, 255)
        expected = np.where(np.eye(5, dtype=bool), 255, 42)
        assert np.array_equal(img[::3, ::3], expected)
        assert render_pgm(cm.entries, PortraitSpec(3)) == render_pgm(cm.entries, PortraitSpec(3))

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            render_pgm([[1, 0]])
        with pytest.raises(ValueError):
            PortraitSpec(0)
