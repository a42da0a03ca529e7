import json
import math
import struct

import numpy as np
import pytest

from hardlabel import (
    AttackConfig,
    ImageTensor,
    ParseError,
    UnsupportedFormatError,
    read_image,
    write_image,
    write_raw,
    write_report,
)
from hardlabel.attack import AttackResult, ResultMetrics
from hardlabel.fileio import trace_path


def make_result(trace=None, metrics=None, queries=1000):
    best = ImageTensor(np.full((4, 4, 1), 0.25))
    return AttackResult(
        best_adversarial=best,
        best_label=1,
        queries_used=queries,
        trace=trace if trace is not None else [(1, math.inf), (2, 0.5)],
        metrics=metrics if metrics is not None else ResultMetrics(0.5, 0.9, 0.95),
        succeeded=True,
    )


class TestReadPnm:
    def test_p5_byte_scaling(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 128, 255, 64]))
        img = read_image(path)
        assert img.shape == (2, 2, 1)
        assert img.range == 1.0
        assert np.allclose(img.flat, [0, 128 / 255, 1.0, 64 / 255])

    def test_p6_three_channels(self, tmp_path):
        path = tmp_path / "img.ppm"
        path.write_bytes(b"P6\n2 1\n255\n" + bytes([255, 0, 0, 0, 255, 0]))
        img = read_image(path)
        assert img.shape == (1, 2, 3)
        assert np.allclose(img.pixels[0, 0], [1.0, 0.0, 0.0])
        assert np.allclose(img.pixels[0, 1], [0.0, 1.0, 0.0])

    def test_range_hint_255_keeps_integer_scale(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_bytes(b"P5\n2 1\n255\n" + bytes([0, 128]))
        img = read_image(path, range_hint=255)
        assert img.range == 255.0
        assert img.flat.tolist() == [0.0, 128.0]

    def test_header_comments_and_whitespace(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_bytes(b"P5 # a comment\n# another\n  2\t1 \n255\n" + bytes([10, 20]))
        img = read_image(path)
        assert img.shape == (1, 2, 1)

    def test_maxval_other_than_255(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_bytes(b"P5\n1 1\n65535\n\x00\x00")
        with pytest.raises(UnsupportedFormatError):
            read_image(path)

    def test_truncated_raster(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_bytes(b"P5\n2 2\n255\n" + bytes([1, 2]))
        with pytest.raises(ParseError):
            read_image(path)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_bytes(b"P5\n2")
        with pytest.raises(ParseError):
            read_image(path)

    def test_unknown_magic(self, tmp_path):
        path = tmp_path / "img.bin"
        path.write_bytes(b"GIF89a....")
        with pytest.raises(UnsupportedFormatError):
            read_image(path)

    def test_bad_range_hint(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_bytes(b"P5\n1 1\n255\n\x00")
        with pytest.raises(ValueError):
            read_image(path, range_hint=0.0)


class TestWritePnm:
    def test_half_rounds_up(self, tmp_path):
        path = tmp_path / "img.pgm"
        write_image(path, ImageTensor(np.full((2, 2, 1), 0.5)))
        assert path.read_bytes().endswith(bytes([128] * 4))

    def test_full_scale_hits_255(self, tmp_path):
        path = tmp_path / "img.pgm"
        write_image(path, ImageTensor(np.ones((1, 1, 1))))
        assert path.read_bytes().endswith(bytes([255]))

    def test_two_channels_rejected(self, tmp_path):
        with pytest.raises(UnsupportedFormatError):
            write_image(tmp_path / "img.pgm", ImageTensor(np.zeros((2, 2, 2))))

    def test_round_trip_quantization_bound(self, tmp_path):
        rng = np.random.default_rng(0)
        img = ImageTensor(rng.uniform(0, 1, size=(5, 7, 1)))
        path = tmp_path / "img.pgm"
        write_image(path, img)
        back = read_image(path)
        assert np.max(np.abs(back.pixels - img.pixels)) <= 1 / 510 + 1e-12

    def test_round_trip_rgb(self, tmp_path):
        rng = np.random.default_rng(1)
        img = ImageTensor(rng.uniform(0, 255, size=(3, 4, 3)), 255.0)
        path = tmp_path / "img.ppm"
        write_image(path, img)
        back = read_image(path, range_hint=255)
        assert np.max(np.abs(back.pixels - img.pixels)) <= 255 / 510 + 1e-9

    def test_byte_exact_round_trip_of_quantized_values(self, tmp_path):
        img = ImageTensor((np.arange(16, dtype=np.float64) / 255).reshape(4, 4, 1))
        path = tmp_path / "img.pgm"
        write_image(path, img)
        assert np.allclose(read_image(path).pixels, img.pixels)


class TestRawFormat:
    def test_bit_exact_round_trip(self, tmp_path):
        rng = np.random.default_rng(2)
        img = ImageTensor(rng.uniform(0, 0.73, size=(3, 5, 3)), 0.73)
        path = tmp_path / "img.redf"
        write_raw(path, img)
        back = read_image(path)
        assert np.array_equal(back.pixels, img.pixels)
        assert back.range == img.range

    def test_header_layout(self, tmp_path):
        img = ImageTensor(np.full((2, 3, 1), 0.5), 2.0)
        path = tmp_path / "img.redf"
        write_raw(path, img)
        data = path.read_bytes()
        magic, h, w, c, range_l = struct.unpack_from("<4sIIId", data, 0)
        assert (magic, h, w, c, range_l) == (b"REDF", 2, 3, 1, 2.0)
        assert len(data) == struct.calcsize("<4sIIId") + 8 * 6

    def test_raw_ignores_range_hint(self, tmp_path):
        img = ImageTensor(np.full((1, 1, 1), 3.0), 7.0)
        path = tmp_path / "img.redf"
        write_raw(path, img)
        assert read_image(path, range_hint=255).range == 7.0

    def test_truncated_payload(self, tmp_path):
        img = ImageTensor(np.zeros((2, 2, 1)))
        path = tmp_path / "img.redf"
        write_raw(path, img)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(ParseError):
            read_image(path)


class TestWriteReport:
    def test_report_fields(self, tmp_path):
        path = tmp_path / "report.json"
        write_report(path, make_result(), AttackConfig(q_max=1000))
        doc = json.loads(path.read_text())
        assert doc["queries_used"] == 1000
        assert doc["succeeded"] is True
        assert doc["best_label"] == 1
        assert doc["metrics"] == {"pert_norm": 0.5, "ssim": 0.9, "cc": 0.95}
        assert doc["config"]["delta_min"] == 0.01
        assert doc["config"]["n"] == 20
        assert doc["config"]["theta"] == 0.0196
        assert doc["config"]["q_max"] == 1000

    def test_trace_csv(self, tmp_path):
        path = tmp_path / "report.json"
        write_report(path, make_result(trace=[(1, math.inf), (2, 0.5), (3, 0.25)]),
                     AttackConfig())
        lines = trace_path(path).read_text().splitlines()
        assert lines[0] == "query_index,best_l2_sq"
        assert lines[1] == "1,inf"
        assert lines[2] == "2,0.5"
        assert lines[3] == "3,0.25"

    def test_empty_trace_header_only(self, tmp_path):
        path = tmp_path / "report.json"
        write_report(path, make_result(trace=[]), AttackConfig())
        assert trace_path(path).read_text() == "query_index,best_l2_sq\n"

    def test_non_finite_metrics_become_null(self, tmp_path):
        path = tmp_path / "report.json"
        metrics = ResultMetrics(0.5, math.nan, math.nan)
        write_report(path, make_result(metrics=metrics), AttackConfig())
        doc = json.loads(path.read_text())
        assert doc["metrics"]["ssim"] is None
        assert doc["metrics"]["cc"] is None

    def test_metrics_echo_matches_recomputation(self, tmp_path):
        """The stored norm is the norm of the stored best vs the source."""
        source = ImageTensor(np.zeros((4, 4, 1)))
        result = make_result(metrics=ResultMetrics(1.0, 0.9, 0.95))
        recomputed = float(np.sum((result.best_adversarial.pixels - source.pixels) ** 2))
        assert recomputed == pytest.approx(result.metrics.pert_norm)
        path = tmp_path / "report.json"
        write_report(path, result, AttackConfig())
        assert json.loads(path.read_text())["metrics"]["pert_norm"] == \
            pytest.approx(recomputed)

    def test_byte_determinism(self, tmp_path):
        result = make_result()
        config = AttackConfig()
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        write_report(a, result, config)
        write_report(b, result, config)
        assert a.read_bytes() == b.read_bytes()
        assert trace_path(a).read_bytes() == trace_path(b).read_bytes()

    def test_trace_path_derivation(self):
        assert trace_path("out/run.json").name == "run.trace.csv"
