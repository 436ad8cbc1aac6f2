import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from pauli_sew.circuit import CircuitBuilder, QacCircuit, random_circuit, to_unitary
from pauli_sew.cli import main


@pytest.fixture
def circuit_file(tmp_path):
    f = tmp_path / "c.json"
    f.write_text(random_circuit(2, 1, 2, 1.0, 3).to_json())
    return f


def test_simulate_summary_and_unitary(tmp_path, circuit_file, capsys):
    assert main(["simulate", "--circuit", str(circuit_file)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["n"] == 2 and doc["unitary"] is True
    out = tmp_path / "out"
    assert main(["--out", str(out), "simulate", "--circuit", str(circuit_file), "--unitary"]) == 0
    u = np.load(out / "unitary.npy")
    c = QacCircuit.from_json(circuit_file.read_text())
    assert np.allclose(u, to_unitary(c))


def test_spectrum_csv(tmp_path):
    f = tmp_path / "cz.json"
    f.write_text(CircuitBuilder(2).cz(0, 1).build().to_json())
    out = tmp_path / "out"
    assert main(["--out", str(out), "spectrum", "--circuit", str(f), "--pauli", "X", "--qubit", "0"]) == 0
    coeffs = list(csv.DictReader((out / "coefficients.csv").open()))
    assert [(r["pauli"], float(r["coefficient"])) for r in coeffs] == [("XZ", pytest.approx(1.0))]
    curve = list(csv.DictReader((out / "concentration.csv").open()))
    assert [r["k"] for r in curve] == ["0", "1", "2"]
    assert set(curve[0]) == {"tool_version", "k", "weight_above_k", "advisory_bound"}


def test_estimate_and_learn(tmp_path, circuit_file, capsys):
    assert main(["--seed", "4", "estimate", "--circuit", str(circuit_file), "--pauli", "Z", "--qubit", "1",
                 "--ell", "1", "--mode", "sampled", "--shots", "50"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["entries"]) == 7 and doc["accuracy"] == 0.05
    out = tmp_path / "L"
    assert main(["--out", str(out), "learn", "--circuit", str(circuit_file), "--pauli", "Y", "--qubit", "0",
                 "--ell", "2", "--kappa", "2"]) == 0
    learned = json.loads((out / "learned_Y0.json").read_text())
    assert learned["support"] == [0, 1] and learned["bound"] == 0.0


def test_sew_synth_distance_pipeline(tmp_path, circuit_file, capsys):
    learned_dir = tmp_path / "L"
    for q in range(2):
        for p in "XYZ":
            assert main(["--out", str(learned_dir), "learn", "--circuit", str(circuit_file), "--pauli", p,
                         "--qubit", str(q), "--ell", "2"]) == 0
    files = sorted(str(f) for f in learned_dir.glob("*.json"))
    sew_out = tmp_path / "S"
    assert main(["--out", str(sew_out), "sew", "--learned", *files, "--circuit", str(circuit_file)]) == 0
    report = json.loads((sew_out / "sew_report.json").read_text())
    assert report["measured_d_avg"] < 1e-8 and len(report["learned"]) == 6
    row = list(csv.DictReader((sew_out / "sew.csv").open()))[0]
    assert float(row["d_avg"]) < 1e-8

    syn_out = tmp_path / "Y"
    assert main(["--out", str(syn_out), "synth", "--report", str(sew_out / "sew_report.json"),
                 "--net-eps", "2"]) == 0
    emitted = QacCircuit.from_json((syn_out / "synth_circuit.json").read_text())
    assert emitted.n == 4
    summary = list(csv.DictReader((syn_out / "synth.csv").open()))[0]
    assert float(summary["d_f_vs_sewn"]) <= float(summary["hybrid_bound"])

    other = tmp_path / "i.json"
    other.write_text(QacCircuit(2).to_json())
    assert main(["distance", str(circuit_file), str(circuit_file)]) == 0
    same = json.loads(capsys.readouterr().out)
    assert same == pytest.approx({"d_f": 0.0, "d_p": 0.0, "d_avg": 0.0}, abs=1e-12)
    assert main(["distance", str(circuit_file), str(other)]) == 0
    diff = json.loads(capsys.readouterr().out)
    assert diff["d_avg"] <= diff["d_p"] <= diff["d_f"]


def test_experiment_subcommand(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment": "hardness", "generator": {"n": 2}}))
    out = tmp_path / "E"
    assert main(["--out", str(out), "experiment", "--config", str(cfg)]) == 0
    assert (out / "hardness.csv").exists() and (out / "hardness_summary.json").exists()


def test_verify_subset_and_failure(capsys, monkeypatch):
    assert main(["verify", "--only", "1", "14"]) == 0
    text = capsys.readouterr().out
    assert "[PASS]  1." in text and "[PASS] 14." in text
    # an impossible tolerance forces a controlled failure and a nonzero exit
    monkeypatch.setenv("PAULI_SEW_TOL", "1e-40")
    assert main(["verify", "--only", "2"]) == 1
    assert "[FAIL]" in capsys.readouterr().out


def test_max_qubits_flag(tmp_path):
    from pauli_sew._config import DimensionError, set_max_qubits
    f = tmp_path / "big.json"
    f.write_text(QacCircuit(5).to_json())
    try:
        with pytest.raises(DimensionError):
            main(["--max-qubits", "4", "simulate", "--circuit", str(f)])
    finally:
        set_max_qubits(12)


def test_module_entry_point(circuit_file):
    res = subprocess.run([sys.executable, "-m", "pauli_sew", "simulate", "--circuit", str(circuit_file)],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["n"] == 2
