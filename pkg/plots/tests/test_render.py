import io
import math
from contextlib import redirect_stdout
from pathlib import Path

import numpy as np
import pytest

from dirmax_plots import FigureSpec, render
from dirmax_plots.cli import main
from dirmax_plots.render import EXPECTED_HEADERS, KINDS, linear_fit

GOLDEN = Path(__file__).parent / "golden"

KIND_TO_CSV = {
    "logn_fit": "logn.csv",
    "lacunary": "lacunary.csv",
    "avs_hist": "avs.csv",
    "gm_plateau": "gm.csv",
    "sharpness_fit": "sharpness.csv",
}


def run_render(kind, csv_path, out_path):
    buf = io.StringIO()
    with redirect_stdout(buf):
        fit = render(FigureSpec(csv_path=str(csv_path), kind=kind,
                                out_path=str(out_path)))
    return fit, buf.getvalue().strip()


class TestRender:
    @pytest.mark.parametrize("kind", KINDS)
    def test_renders_all_kinds(self, kind, tmp_path):
        out = tmp_path / f"{kind}.png"
        fit, echo = run_render(kind, GOLDEN / KIND_TO_CSV[kind], out)
        assert out.exists() and out.stat().st_size > 0
        assert echo.startswith(kind + ",")
        parts = echo.split(",")
        assert len(parts) == 4
        assert (float(parts[1]), float(parts[2]), float(parts[3])) == fit

    @staticmethod
    def _reference_fit(x, y):
        # independent least-squares route (SVD-based polyfit + definition
        # of R^2), pinning the echoed values to the true LS solution
        slope, intercept = np.polyfit(x, y, 1)
        resid = np.asarray(y) - (slope * np.asarray(x) + intercept)
        syy = float(np.sum((np.asarray(y) - np.mean(y)) ** 2))
        r2 = 1.0 - float(np.sum(resid**2)) / syy
        return float(slope), float(intercept), r2

    def test_logn_fit_matches_reference_least_squares(self, tmp_path):
        rows = (GOLDEN / "logn.csv").read_text().strip().splitlines()[1:]
        n_vals = [float(r.split(",")[0]) for r in rows]
        est = [float(r.split(",")[1]) for r in rows]
        want = self._reference_fit([math.log(v) for v in n_vals], est)
        got, _ = run_render("logn_fit", GOLDEN / "logn.csv", tmp_path / "f.png")
        assert np.allclose(got, want, rtol=0, atol=1e-9)

    def test_sharpness_fit_values(self, tmp_path):
        rows = (GOLDEN / "sharpness.csv").read_text().strip().splitlines()[1:]
        deltas = [float(r.split(",")[0]) for r in rows]
        est = [float(r.split(",")[1]) for r in rows]
        want = self._reference_fit([math.log(1.0 / d) for d in deltas], est)
        got, _ = run_render("sharpness_fit", GOLDEN / "sharpness.csv",
                            tmp_path / "s.png")
        assert np.allclose(got, want, rtol=0, atol=1e-9)

    def test_echo_deterministic(self, tmp_path):
        _, e1 = run_render("gm_plateau", GOLDEN / "gm.csv", tmp_path / "a.png")
        _, e2 = run_render("gm_plateau", GOLDEN / "gm.csv", tmp_path / "b.png")
        assert e1 == e2

    def test_schema_mismatch_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("N,norm,seconds\n2,1.0,0.1\n")
        with pytest.raises(ValueError, match="schema mismatch"):
            render(FigureSpec(csv_path=str(bad), kind="logn_fit",
                              out_path=str(tmp_path / "x.png")))
        assert not (tmp_path / "x.png").exists()

    def test_cross_schema_rejected(self, tmp_path):
        # a valid avs CSV is not a valid gm CSV
        with pytest.raises(ValueError, match="schema mismatch"):
            render(FigureSpec(csv_path=str(GOLDEN / "avs.csv"), kind="gm_plateau",
                              out_path=str(tmp_path / "x.png")))

    def test_empty_csv_rejected(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text(EXPECTED_HEADERS["logn_fit"] + "\n")
        with pytest.raises(ValueError, match="empty"):
            render(FigureSpec(csv_path=str(empty), kind="logn_fit",
                              out_path=str(tmp_path / "x.png")))
        assert not (tmp_path / "x.png").exists()

    def test_unknown_kind(self, tmp_path):
        with pytest.raises(ValueError, match="unknown figure kind"):
            render(FigureSpec(csv_path=str(GOLDEN / "logn.csv"), kind="pie",
                              out_path=str(tmp_path / "x.png")))


class TestFitFormula:
    def test_three_point_hand_example(self):
        # y = 2x + 1 exactly
        slope, intercept, r2 = linear_fit([0.0, 1.0, 2.0], [1.0, 3.0, 5.0])
        assert abs(slope - 2.0) <= 1e-12
        assert abs(intercept - 1.0) <= 1e-12
        assert abs(r2 - 1.0) <= 1e-12
        # hand-computed least squares for (0,0), (1,1), (2,1):
        # slope = 1/2, intercept = 1/6, r2 = 3/4
        slope, intercept, r2 = linear_fit([0.0, 1.0, 2.0], [0.0, 1.0, 1.0])
        assert abs(slope - 0.5) <= 1e-9
        assert abs(intercept - 1.0 / 6.0) <= 1e-9
        assert abs(r2 - 0.75) <= 1e-9


class TestCli:
    def test_render_command(self, tmp_path, capsys):
        out = tmp_path / "fig.png"
        code = main(["render", "--kind", "logn_fit", "--in",
                     str(GOLDEN / "logn.csv"), "--out", str(out)])
        assert code == 0
        assert out.exists()
        echo = capsys.readouterr().out.strip()
        assert echo.startswith("logn_fit,")

    def test_render_bad_csv_exit_2(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("x,y\n1,2\n")
        code = main(["render", "--kind", "logn_fit", "--in", str(bad),
                     "--out", str(tmp_path / "x.png")])
        assert code == 2
