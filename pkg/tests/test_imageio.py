import cv2
import numpy as np
import pytest

from radiocal.grid import X_GRID
from radiocal.imageio import (
    CurveFormatError,
    ImageFormatError,
    format_curve,
    load_image,
    parse_curve,
    read_curve,
    save_image,
    write_curve,
)
from radiocal.model import GgcmParams, ggcm_inverse_curve


def write_rgb(path, rgb):
    cv2.imwrite(str(path), np.asarray(rgb)[..., ::-1])


class TestLoad:
    def test_eight_bit_values(self, tmp_path):
        px = np.array([[[255, 255, 255], [0, 0, 0], [51, 102, 204]]], dtype=np.uint8)
        write_rgb(tmp_path / "a.png", px)
        img = load_image(tmp_path / "a.png")
        assert img.shape == (1, 3, 3)
        np.testing.assert_array_equal(img[0, 0], [1.0, 1.0, 1.0])
        np.testing.assert_array_equal(img[0, 1], [0.0, 0.0, 0.0])
        # 51/255 = 1/5 exactly as a rational; float division gives the nearest double
        np.testing.assert_array_equal(img[0, 2], [0.2, 0.4, 0.8])

    def test_sixteen_bit(self, tmp_path):
        px = np.array([[[65535, 0, 32768]]], dtype=np.uint16)
        write_rgb(tmp_path / "b.png", px)
        np.testing.assert_array_equal(load_image(tmp_path / "b.png")[0, 0], [1.0, 0.0, 32768 / 65535])

    def test_deterministic(self, tmp_path):
        write_rgb(tmp_path / "c.png", np.random.default_rng(0).integers(0, 256, (9, 9, 3), dtype=np.uint8))
        np.testing.assert_array_equal(load_image(tmp_path / "c.png"), load_image(tmp_path / "c.png"))

    def test_errors(self, tmp_path):
        with pytest.raises(ImageFormatError):
            load_image(tmp_path / "missing.png")
        (tmp_path / "junk.png").write_bytes(b"not an image")
        with pytest.raises(ImageFormatError):
            load_image(tmp_path / "junk.png")
        cv2.imwrite(str(tmp_path / "gray.png"), np.zeros((5, 5), np.uint8))
        with pytest.raises(ImageFormatError):
            load_image(tmp_path / "gray.png")
        write_rgb(tmp_path / "small.png", np.zeros((5, 5, 3), np.uint8))
        with pytest.raises(ImageFormatError):
            load_image(tmp_path / "small.png", min_size=21)

    @pytest.mark.parametrize("bits", [8, 16])
    def test_save_round_trip(self, tmp_path, bits):
        top = 2**bits - 1
        img = np.random.default_rng(3).integers(0, top + 1, (7, 5, 3)) / top
        save_image(tmp_path / "s.png", img, bits=bits)
        np.testing.assert_array_equal(load_image(tmp_path / "s.png"), img)


class TestCurves:
    def test_identity_exact(self, tmp_path):
        write_curve(X_GRID, tmp_path / "id.csv")
        back = read_curve(tmp_path / "id.csv")
        np.testing.assert_array_equal(back.values, X_GRID)
        lines = (tmp_path / "id.csv").read_text().splitlines()
        assert lines[0] == "x,g" and lines[1] == "0.0,0.0" and lines[-1] == "1.0,1.0"

    def test_gamma_round_trip(self, tmp_path):
        curve = ggcm_inverse_curve(GgcmParams.gamma(0.4))
        write_curve(curve, tmp_path / "g.csv")
        assert np.max(np.abs(read_curve(tmp_path / "g.csv").values - curve.values)) <= 1e-9

    def test_bad_files(self):
        text = format_curve(X_GRID)
        rows = text.splitlines()
        with pytest.raises(CurveFormatError):
            parse_curve("\n".join(rows[:-1]))  # 99 rows
        with pytest.raises(CurveFormatError):
            parse_curve("\n".join(rows[1:]))  # no header
        with pytest.raises(CurveFormatError):
            parse_curve(text.replace("1.0,1.0", "1.0,1.5"))
        with pytest.raises(CurveFormatError):
            parse_curve(text.replace("1.0,1.0", "1.0,abc"))
        with pytest.raises(CurveFormatError):
            parse_curve(text.replace("1.0,1.0", "0.9,1.0"))
