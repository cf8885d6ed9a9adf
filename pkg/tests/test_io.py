"""PGM, float-grid, dictionary, and CSV round trips."""

import numpy as np
import pytest

from spda.io import (CSV_HEADER, read_dictionary, read_float_grid, read_image,
                     read_pgm, write_dictionary, write_float_grid,
                     write_image, write_pgm, write_results_csv)


class TestPgm:
    def test_binary_8bit_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        img = rng.integers(0, 256, size=(7, 9)).astype(float)
        path = tmp_path / "a.pgm"
        write_pgm(path, img)
        np.testing.assert_array_equal(read_pgm(path), img)

    def test_plain_round_trip(self, tmp_path):
        img = np.array([[0.0, 128.0], [255.0, 3.0]])
        path = tmp_path / "a.pgm"
        write_pgm(path, img, plain=True)
        assert path.read_bytes().startswith(b"P2")
        np.testing.assert_array_equal(read_pgm(path), img)

    def test_16bit_values_survive(self, tmp_path):
        img = np.array([[0.0, 300.0], [65535.0, 1000.0]])
        path = tmp_path / "wide.pgm"
        write_pgm(path, img)
        np.testing.assert_array_equal(read_pgm(path), img)

    def test_write_rounds_and_clips(self, tmp_path):
        path = tmp_path / "c.pgm"
        write_pgm(path, np.array([[0.4, 0.6], [1.2, 0.0]]))
        np.testing.assert_array_equal(read_pgm(path), [[0, 1], [1, 0]])

    def test_comments_in_header(self, tmp_path):
        path = tmp_path / "c.pgm"
        path.write_bytes(b"P2\n# made by hand\n2 1\n# another\n255\n7 8\n")
        np.testing.assert_array_equal(read_pgm(path), [[7, 8]])

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_bytes(b"P7\n2 2\n255\n\x00\x00\x00\x00")
        with pytest.raises(ValueError):
            read_pgm(path)

    def test_truncated_pixels_rejected(self, tmp_path):
        path = tmp_path / "short.pgm"
        path.write_bytes(b"P5\n2 2\n255\n\x00\x01")
        with pytest.raises(ValueError):
            read_pgm(path)


class TestFloatGrid:
    def test_lossless_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        img = rng.random((5, 4)) * np.array([1e-12, 1.0, 1e6, 0.3])
        path = tmp_path / "g.txt"
        write_float_grid(path, img)
        np.testing.assert_array_equal(read_float_grid(path), img)

    def test_header_dimensions(self, tmp_path):
        path = tmp_path / "g.txt"
        write_float_grid(path, np.zeros((3, 7)))
        assert path.read_text().splitlines()[0] == "3 7"

    def test_wrong_count_rejected(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("2 2\n1 2 3\n")
        with pytest.raises(ValueError):
            read_float_grid(path)


class TestImageDispatch:
    def test_pgm_extension_uses_pgm(self, tmp_path):
        img = np.array([[1.0, 2.0]])
        p = tmp_path / "x.pgm"
        write_image(p, img)
        assert p.read_bytes()[:2] == b"P5"
        np.testing.assert_array_equal(read_image(p), img)

    def test_other_extension_uses_float_grid(self, tmp_path):
        img = np.array([[0.25, 1e-9]])
        p = tmp_path / "x.grid"
        write_image(p, img)
        np.testing.assert_array_equal(read_image(p), img)


class TestDictionaryFile:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(4)
        dico = rng.standard_normal((16, 9))
        path = tmp_path / "d.txt"
        write_dictionary(path, dico)
        np.testing.assert_array_equal(read_dictionary(path), dico)

    def test_header_is_rows_cols(self, tmp_path):
        path = tmp_path / "d.txt"
        write_dictionary(path, np.zeros((4, 2)))
        assert path.read_text().splitlines()[0] == "4 2"


class TestResultsCsv:
    rows = [
        {"image": "ridges", "peak": 2.0, "realization": 0, "method": "spda",
         "psnr_db": 21.5, "seconds": 12.25},
        {"image": "ridges", "peak": 2.0, "realization": "avg",
         "method": "spda", "psnr_db": np.inf, "seconds": None},
    ]

    def test_header_and_layout(self, tmp_path):
        path = tmp_path / "r.csv"
        write_results_csv(path, self.rows)
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        assert lines[1].startswith("ridges,2,0,spda,21.500000")
        assert len(lines) == 3

    def test_seconds_blank_by_default(self, tmp_path):
        path = tmp_path / "r.csv"
        write_results_csv(path, self.rows)
        assert path.read_text().splitlines()[1].endswith(",")

    def test_seconds_formatted_when_asked(self, tmp_path):
        path = tmp_path / "r.csv"
        write_results_csv(path, self.rows, include_timings=True)
        line = path.read_text().splitlines()[1]
        assert line.endswith(",12.250")

    def test_infinite_psnr_spelled_inf(self, tmp_path):
        path = tmp_path / "r.csv"
        write_results_csv(path, self.rows)
        assert ",inf," in path.read_text().splitlines()[2] + ","

    def test_identical_rows_identical_bytes(self, tmp_path):
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_results_csv(p1, self.rows)
        write_results_csv(p2, self.rows)
        assert p1.read_bytes() == p2.read_bytes()
