"""End-to-end checks of the command-line sweep tool."""

import json
import math
import subprocess
import sys

import pytest

from helpers import OMEGA_B_CALIBRATED
from spaserkit.analysis import growth_rate, steady_state_numeric, threshold_find
from spaserkit.cli import entry_point
from spaserkit.params import default_params
from spaserkit.tables import read_csv, read_json


def write_config(tmp_path, data, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def data_lines(text):
    return [l for l in text.splitlines() if not l.startswith("#")]


class TestTrajectory:
    def test_relaxes_onto_the_algebraic_operating_point(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {
                "model": {
                    "gain": {"pump_g": 8e12},
                    "drive": {"omega_a_rabi": 16e12},
                },
                "trajectory": {"t_end": 4e-12, "store_every": 100},
            },
        )
        out = str(tmp_path / "traj.csv")
        code = entry_point(["trajectory", "--config", cfg, "--out", out])
        assert code == 0
        table = read_csv(out)
        assert [c[0] for c in table.columns] == [
            "t", "N_n", "rho11", "rho22", "rho33",
            "re_rho21", "im_rho21", "trace_err",
        ]
        p = default_params(pump_g=8e12, omega_a_rabi=16e12)
        target = steady_state_numeric(p).n_n
        final_n = table.rows[-1][table.column_index("N_n")]
        assert final_n == pytest.approx(target, rel=0.01)
        assert table.rows[0][0] == 0.0
        assert all(abs(r[-1]) <= 1e-6 for r in table.rows)

    def test_axis_prefixes_rows(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {
                "sweep": [{"path": "gain.pump_g", "values": [6e12, 8e12]}],
                "trajectory": {"t_end": 1e-13, "store_every": 50},
            },
        )
        out = str(tmp_path / "traj.csv")
        assert entry_point(["trajectory", "--config", cfg, "--out", out]) == 0
        table = read_csv(out)
        assert table.columns[0] == ("gain.pump_g", "rad/s")
        pumps = sorted(set(table.column("gain.pump_g")))
        assert pumps == [6e12, 8e12]


class TestSteadySweep:
    def test_rows_in_lexicographic_axis_order(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {
                "sweep": [
                    {"path": "gain.pump_g", "values": [6e12, 2e13]},
                    {"path": "drive.omega_a_rabi", "values": [0.0, 16e12]},
                ],
            },
        )
        out = str(tmp_path / "s.csv")
        assert entry_point(["steady-sweep", "--config", cfg, "--out", out]) == 0
        table = read_csv(out)
        heads = [(r[0], r[1]) for r in table.rows]
        assert heads == [
            (6e12, 0.0), (6e12, 16e12), (2e13, 0.0), (2e13, 16e12),
        ]

    def test_rows_match_direct_solver_calls(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {
                "sweep": [
                    {"path": "gain.pump_g", "values": [6e12, 2e13]},
                    {"path": "drive.omega_a_rabi", "values": [0.0, 16e12]},
                ],
            },
        )
        out = str(tmp_path / "s.csv")
        entry_point(["steady-sweep", "--config", cfg, "--out", out])
        table = read_csv(out)
        idx = table.column_index("N_n")
        for row in table.rows:
            ref = steady_state_numeric(
                default_params(pump_g=row[0], omega_a_rabi=row[1])
            )
            assert row[idx] == pytest.approx(ref.n_n, rel=1e-9, abs=1e-30)
            assert row[table.column_index("converged")] == 1.0

    def test_invalid_grid_point_flags_partial_exit(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {"sweep": [{"path": "plasmon.n_p", "values": [60000.0, 0.5]}]},
        )
        out = str(tmp_path / "s.csv")
        code = entry_point(["steady-sweep", "--config", cfg, "--out", out])
        assert code == 2
        table = read_csv(out)
        assert len(table.rows) == 2
        good, bad = table.rows
        assert good[table.column_index("converged")] == 1.0
        assert bad[table.column_index("converged")] == 0.0
        assert math.isnan(bad[table.column_index("N_n")])

    def test_worker_count_does_not_change_the_bytes(self, tmp_path):
        data = {
            "sweep": [
                {"path": "gain.pump_g", "values": [4.4e12, 6e12, 8e12]},
                {"path": "drive.omega_a_rabi", "values": [0.0, 16e12]},
            ],
        }
        cfg = write_config(tmp_path, data)
        out1 = str(tmp_path / "w1.csv")
        outn = str(tmp_path / "wn.csv")
        assert entry_point(
            ["steady-sweep", "--config", cfg, "--out", out1, "--workers", "1"]
        ) == 0
        assert entry_point(
            ["steady-sweep", "--config", cfg, "--out", outn, "--workers", "3"]
        ) == 0
        strip = lambda p: [
            l for l in open(p).read().splitlines()
            if not l.startswith("# timestamp")
        ]
        assert strip(out1) == strip(outn)

    def test_requires_a_sweep_axis(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {})
        assert entry_point(["steady-sweep", "--config", cfg]) == 1
        assert "sweep" in capsys.readouterr().err

    def test_stdout_when_no_out_path(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {"sweep": [{"path": "gain.pump_g", "values": [8e12]}]},
        )
        assert entry_point(["steady-sweep", "--config", cfg]) == 0
        text = capsys.readouterr().out
        lines = data_lines(text)
        assert lines[0].startswith("gain.pump_g (rad/s),N_n (1)")
        assert len(lines) == 2

    def test_json_format(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {"sweep": [{"path": "gain.pump_g", "values": [8e12]}]},
        )
        out = str(tmp_path / "s.json")
        assert entry_point(
            ["steady-sweep", "--config", cfg, "--out", out, "--format", "json"]
        ) == 0
        payload = json.loads(open(out).read())
        assert payload["metadata"]["command"] == "steady-sweep"
        assert "config_hash" in payload["metadata"]
        table = read_json(out)
        assert table.rows[0][0] == 8e12


class TestThreshold:
    def test_threshold_sweep_matches_direct_calls(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {"sweep": [{"path": "drive.omega_a_rabi", "values": [0.0, 16e12]}]},
        )
        out = str(tmp_path / "th.csv")
        assert entry_point(["threshold", "--config", cfg, "--out", out]) == 0
        table = read_csv(out)
        idx = table.column_index("g_th")
        for row in table.rows:
            ref = threshold_find(default_params(omega_a_rabi=row[0])).g_th
            assert row[idx] == pytest.approx(ref, rel=1e-9)

    def test_missing_threshold_is_a_nan_sentinel_not_a_failure(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {"model": {"plasmon": {"omega_b_single": 0.0}}},
        )
        out = str(tmp_path / "th.csv")
        code = entry_point(["threshold", "--config", cfg, "--out", out])
        assert code == 0
        table = read_csv(out)
        assert len(table.rows) == 1
        assert math.isnan(table.rows[0][table.column_index("g_th")])


class TestStability:
    def test_columns_and_growth_values(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {
                "model": {"drive": {"omega_a_rabi": 16e12}},
                "sweep": [{"path": "gain.pump_g", "values": [4.4e12, 6e12, 8e12]}],
            },
        )
        out = str(tmp_path / "st.csv")
        assert entry_point(["stability", "--config", cfg, "--out", out]) == 0
        table = read_csv(out)
        assert [c[0] for c in table.columns] == [
            "omega_a", "pump_g", "gamma_s", "gamma_s_over_gamma_n",
            "leading_re", "leading_im",
        ]
        gs = table.column("gamma_s")
        assert gs == sorted(gs)  # growth rate rises with pump
        ref = growth_rate(default_params(pump_g=8e12, omega_a_rabi=16e12))
        assert gs[-1] == pytest.approx(ref.gamma_s, rel=1e-9)
        assert all(v == 16e12 for v in table.column("omega_a"))


class TestCalibrate:
    def test_success_row(self, tmp_path):
        cfg = write_config(tmp_path, {})
        out = str(tmp_path / "cal.csv")
        assert entry_point(["calibrate", "--config", cfg, "--out", out]) == 0
        table = read_csv(out)
        assert [c[0] for c in table.columns] == [
            "omega_b_single", "threshold_ratio", "g_th_drive_off", "g_th_drive_on",
        ]
        (row,) = table.rows
        assert row[0] == pytest.approx(OMEGA_B_CALIBRATED, rel=1e-6)
        assert row[1] == pytest.approx(2.0, rel=0.01)
        assert row[2] / row[3] == pytest.approx(row[1], rel=1e-12)

    def test_unattainable_target_emits_curve_and_partial_exit(
        self, tmp_path, capsys
    ):
        cfg = write_config(tmp_path, {"calibrate": {"target_ratio": 5.0}})
        out = str(tmp_path / "cal.csv")
        code = entry_point(["calibrate", "--config", cfg, "--out", out])
        assert code == 2
        assert "calibration failed" in capsys.readouterr().err
        table = read_csv(out)
        assert [c[0] for c in table.columns] == ["omega_b_single", "threshold_ratio"]
        assert len(table.rows) >= 3
        for _w, ratio in table.rows:
            assert math.isnan(ratio) or ratio < 5.0


class TestErrors:
    def test_missing_config_file(self, tmp_path, capsys):
        code = entry_point(
            ["steady-sweep", "--config", str(tmp_path / "nope.json")]
        )
        assert code == 1
        assert "not found" in capsys.readouterr().err

    def test_malformed_json(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{")
        assert entry_point(["threshold", "--config", str(path)]) == 1
        assert "malformed" in capsys.readouterr().err

    def test_bad_worker_override(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {})
        assert entry_point(
            ["threshold", "--config", cfg, "--workers", "0"]
        ) == 1
        assert "--workers" in capsys.readouterr().err

    def test_unknown_command_usage_error(self):
        assert entry_point(["frobnicate", "--config", "x"]) == 1


def test_console_script_is_installed():
    proc = subprocess.run(
        [sys.executable, "-m", "spaserkit", "--help"],
        capture_output=True,
        text=True,
    )
    # module execution and the console script share entry_point
    assert proc.returncode == 0
    assert "steady-sweep" in proc.stdout
