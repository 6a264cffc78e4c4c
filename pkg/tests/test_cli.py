import csv
import io
import json

import numpy as np
import pytest

from pulseforge.cli import EXIT_INVALID, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main, parse_int_list, parse_templates
from pulseforge.ir import Channel, Envelope, Instruction, PulseParams, Schedule, serialize_schedule
from pulseforge.metrics import CSV_COLUMNS

GOLDEN_HEADER = "template,n_qubits,n_layers,expr_kl,ent_mean_q,ent_max_q,epd,n_params,n_cr,duration_dt,samples,seed"


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ")
    return lines[0], list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def write_schedule(path, sqp_amp=0.2, cr_duration=256, cr_amp=0.3):
    gauss = Envelope("gaussian")
    square = Envelope("gaussian_square", rise_fall=16)
    s = Schedule(
        2,
        (
            Instruction("play_sqp", Channel.drive(0), 0, PulseParams(sqp_amp, 1.0, 160), gauss),
            Instruction("play_cr", Channel.control(0, 1), 160, PulseParams(cr_amp, np.pi, cr_duration), square),
        ),
    )
    path.write_text(serialize_schedule(s))
    return path


class TestParsing:
    def test_int_lists(self):
        assert parse_int_list("3") == [3]
        assert parse_int_list("2-4") == [2, 3, 4]
        assert parse_int_list("5,2,3") == [2, 3, 5]

    def test_templates(self):
        assert parse_templates(["1-3"]) == ["HE", "HE_fixCR", "DECAY"]
        assert parse_templates(["rxcx2q,HE", "1"]) == ["RXCX2Q", "HE"]

    def test_usage_errors(self, capsys):
        assert main(["report", "--template", "NOPE"]) == EXIT_USAGE
        assert main(["report", "--template", "HE", "--qubits", "4-2"]) == EXIT_USAGE
        assert main(["frobnicate"]) == EXIT_USAGE
        assert main(["report", "--template", "DRESSED_2Q", "--qubits", "3"]) == EXIT_USAGE


class TestReport:
    def test_golden_header_and_cardinality(self, tmp_path):
        args = ["report", "--template", "1-6", "--qubits", "2-4", "--samples", "20", "--ent-samples", "10",
                "--epd-points", "1", "--seed", "3", "--out", str(tmp_path)]
        assert main(args) == EXIT_OK
        meta, rows = read_csv(tmp_path / "report.csv")
        assert (tmp_path / "report.csv").read_text().splitlines()[1] == GOLDEN_HEADER
        assert GOLDEN_HEADER == ",".join(CSV_COLUMNS)
        assert "seed=3" in meta and "device_digest=" in meta and "version=" in meta
        assert len(rows) == 18
        for row in rows:
            if row["template"] == "HE_fixCR":
                n = int(row["n_qubits"])
                assert int(row["n_params"]) == 2 * (2 * n - 1)

    def test_rerun_byte_identical(self, tmp_path):
        base = ["report", "--template", "HE", "--template", "RAND_7", "--samples", "40", "--ent-samples", "20",
                "--epd-points", "1", "--format", "csv", "--format", "json"]
        assert main(base + ["--out", str(tmp_path / "a")]) == EXIT_OK
        assert main(base + ["--out", str(tmp_path / "b")]) == EXIT_OK
        for name in ("report.csv", "report.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        doc = json.loads((tmp_path / "a" / "report.json").read_text())
        assert doc["meta"]["seed"] == 0 and len(doc["reports"]) == 2

    def test_svg(self, tmp_path):
        assert main(["expr", "--template", "PULSE_1Q", "--qubits", "1", "--samples", "50", "--format", "svg",
                     "--out", str(tmp_path)]) == EXIT_OK
        svg = (tmp_path / "hist_PULSE_1Q_n1_l1.svg").read_text()
        assert svg.startswith("<svg") or svg.startswith("<?xml")
        assert "seed=0" in svg and "polyline" in svg
        assert main(["expr", "--template", "RZ", "--qubits", "1", "--samples", "5", "--format", "svg"]) == EXIT_USAGE

    def test_single_metric_shortcuts(self, tmp_path):
        assert main(["epd", "--template", "RXCX2Q", "--out", str(tmp_path)]) == EXIT_OK
        _, rows = read_csv(tmp_path / "epd.csv")
        assert rows[0]["epd"] == "3" and rows[0]["expr_kl"] == "" and rows[0]["duration_dt"] == "1696"
        assert main(["ent", "--template", "BLOCKPULSE_2Q", "--samples", "30", "--out", str(tmp_path)]) == EXIT_OK
        _, rows = read_csv(tmp_path / "ent.csv")
        assert rows[0]["samples"] == "30" and rows[0]["epd"] == ""

    def test_stdout(self, capsys):
        assert main(["expr", "--template", "RZ", "--qubits", "1", "--samples", "100"]) == EXIT_OK
        out = capsys.readouterr().out
        assert GOLDEN_HEADER in out and "3.912023" in out


class TestBloch:
    def test_amplitude_sweep(self, tmp_path):
        assert main(["bloch", "--sweep", "amplitude", "--samples", "200", "--out", str(tmp_path)]) == EXIT_OK
        _, rows = read_csv(tmp_path / "bloch_amplitude.csv")
        assert len(rows) == 200
        assert max(abs(float(r["x"])) for r in rows) <= 1e-9

    def test_angle_sweep(self, tmp_path):
        assert main(["bloch", "--sweep", "angle", "--samples", "200", "--out", str(tmp_path)]) == EXIT_OK
        _, rows = read_csv(tmp_path / "bloch_angle.csv")
        z = [float(r["z"]) for r in rows]
        assert max(z) - min(z) <= 1e-9

    def test_zero_samples(self, tmp_path):
        assert main(["bloch", "--samples", "0", "--out", str(tmp_path)]) == EXIT_OK
        lines = (tmp_path / "bloch_amplitude.csv").read_text().splitlines()
        assert lines[1] == "amplitude,x,y,z" and len(lines) == 2


class TestValidate:
    def test_valid(self, tmp_path, capsys):
        assert main(["validate", str(write_schedule(tmp_path / "s.json"))]) == EXIT_OK
        assert main(["validate", str(write_schedule(tmp_path / "s.json")), "--backend", "ibmq_guadalupe"]) == EXIT_OK

    def test_granularity(self, tmp_path, capsys):
        path = write_schedule(tmp_path / "s.json", cr_duration=270)
        assert main(["validate", str(path)]) == EXIT_INVALID
        assert "duration-granularity" in capsys.readouterr().out

    def test_range(self, tmp_path, capsys):
        path = write_schedule(tmp_path / "s.json", cr_duration=1040)
        assert main(["validate", str(path)]) == EXIT_INVALID
        assert "duration-out-of-range" in capsys.readouterr().out

    def test_guadalupe_amplitude(self, tmp_path, capsys):
        path = write_schedule(tmp_path / "s.json", sqp_amp=0.05)
        assert main(["validate", str(path)]) == EXIT_OK
        capsys.readouterr()
        assert main(["validate", str(path), "--backend", "ibmq_guadalupe"]) == EXIT_INVALID
        out = capsys.readouterr().out
        assert "amplitude-out-of-range" in out and "0.1" in out and "0.4" in out

    def test_parse_error(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"version": 1, "n_qubits": 1, "instructions": [{"kind": "play_sqp"}]}')
        assert main(["validate", str(path)]) == EXIT_INVALID
        assert "parse error" in capsys.readouterr().err

    def test_missing(self, tmp_path, capsys):
        assert main(["validate", str(tmp_path / "none.json")]) == EXIT_RUNTIME


class TestVQE:
    def test_missing_file(self, tmp_path, capsys):
        missing = tmp_path / "absent.txt"
        assert main(["vqe", str(missing)]) == EXIT_RUNTIME
        assert str(missing) in capsys.readouterr().err

    def test_bad_hamiltonian(self, tmp_path, capsys):
        path = tmp_path / "h.txt"
        path.write_text("1.0 ZZ\nx ZI\n")
        assert main(["vqe", str(path)]) == EXIT_INVALID
        assert "line 2" in capsys.readouterr().err

    def test_h2(self, tmp_path):
        from importlib import resources

        h2 = resources.files("pulseforge.data").joinpath("h2_sto3g_2q.txt")
        args = ["vqe", str(h2), "--template", "2", "--layers", "2", "--restarts", "3", "--out", str(tmp_path)]
        assert main(args) == EXIT_OK
        doc = json.loads((tmp_path / "vqe_summary.json").read_text())
        s = doc["summary"]
        assert abs(s["gap"]) <= 1e-3
        assert s["duration_dt"] < s["baseline_duration_dt"]
        assert s["n_terms"] == 5 and doc["meta"]["seed"] == 0
        trace = (tmp_path / "vqe_trace.csv").read_text().splitlines()
        assert trace[0].startswith("# ") and trace[1] == "step,energy"
        assert len(trace) == 2 + 501

    def test_qubit_mismatch(self, tmp_path):
        path = tmp_path / "h.txt"
        path.write_text("1.0 Z\n")
        assert main(["vqe", str(path), "--template", "HE"]) == EXIT_USAGE
