import csv
import json

import pytest

from nikishin_lab.cli import main
from nikishin_lab.demos import demo_descriptor


def _run(tmp_path, *args):
    out = tmp_path / 'out'
    code = main(list(args) + ['--out', str(out), '--no-figures'])
    return code, out


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


# -------
# Oracles
# -------

def test_hp_scan_demo_all_normal(tmp_path):
    code, out = _run(tmp_path, 'hp-scan', '--system', 'demo:01', '--max-total', '6')
    assert code == 0
    rows = _rows(out / 'scan.csv')
    assert rows[0] == ['n1', 'n2', 'degrees', 'nullity', 'gap', 'normal']
    assert all(r[-1] == 'true' for r in rows[1:])


def test_malformed_interval_exit_one(tmp_path, capsys):
    d = demo_descriptor('01')
    d['S2'][0]['interval'] = [3.0, 2.0]
    p = tmp_path / 'bad.json'
    p.write_text(json.dumps(d))
    code, _ = _run(tmp_path, 'system-build', '--system', str(p))
    assert code == 1
    assert 'input error' in capsys.readouterr().err


def test_reduce_verify_p21(tmp_path):
    code, out = _run(tmp_path, 'reduce-verify', '--id', 'P21')
    assert code == 0
    rows = _rows(out / 'identities.csv')
    assert rows[0] == ['id', 'bindings_hash', 'probe_re', 'probe_im', 'residual', 'tol']
    assert all(float(r[4]) < 1e-8 for r in rows[1:])


def test_bundled_demo_loads(tmp_path):
    code, out = _run(tmp_path, 'system-build', '--system', 'demo:11')
    assert code == 0 and (out / 'system.json').exists()


def test_distinct_base_descriptors_rejected(tmp_path):
    base = {'kind': 'lebesgue', 'interval': [-1.0, 1.0]}
    other = {'kind': 'lebesgue', 'interval': [-1.0, 1.5]}
    d = {'S1': [base, {'kind': 'lebesgue', 'interval': [2.0, 3.0]}], 'S2': [other]}
    p = tmp_path / 'two_bases.json'
    p.write_text(json.dumps(d))
    code, _ = _run(tmp_path, 'system-build', '--system', str(p))
    assert code == 1


def test_round_trip_preserves_masses(tmp_path):
    code, out = _run(tmp_path, 'system-build', '--system', 'demo:11')
    first = json.loads((out / 'summary.json').read_text())['masses']
    code2, out2 = _run(tmp_path / 'again', 'system-build', '--system', str(out / 'system.json'))
    second = json.loads((out2 / 'summary.json').read_text())['masses']
    assert code == code2 == 0
    for k in first:
        assert second[k] == pytest.approx(first[k], rel=1e-12)


def test_json_schema_v1(tmp_path):
    _, out = _run(tmp_path, 'system-build', '--system', 'demo:m0')
    assert json.loads((out / 'summary.json').read_text())['schema'] == 'v1'


def test_rate_dat_two_columns(tmp_path):
    code, out = _run(tmp_path, 'markov-rate', '--system', 'demo:01', '--max-size', '6')
    assert code == 0
    lines = (out / 'rate.dat').read_text().splitlines()
    assert len(lines) == 6 and all(len(line.split()) == 2 for line in lines)


# ----------
# Properties
# ----------

def test_deterministic_csv(tmp_path):
    _, a = _run(tmp_path / 'a', 'quad-table', '--system', 'demo:01', '--n', '3,4', '--seed', '5')
    _, b = _run(tmp_path / 'b', 'quad-table', '--system', 'demo:01', '--n', '3,4', '--seed', '5')
    assert (a / 'quad_table.csv').read_bytes() == (b / 'quad_table.csv').read_bytes()


def test_fifteen_significant_digits(tmp_path):
    _, out = _run(tmp_path, 'quad-table', '--system', 'demo:m0', '--n', '2')
    rows = _rows(out / 'quad_table.csv')
    assert float(rows[1][2]) == pytest.approx(-0.577350269189626, abs=1e-15)
    assert len(rows[1][2].lstrip('-0.').replace('.', '')) == 15


def test_claim_violation_exit_two(tmp_path, capsys):
    code, _ = _run(tmp_path, 'markov-rate', '--system', 'demo:01', '--max-size', '4', '--tol', '-1')
    assert code == 2
    assert 'Markov rate' in capsys.readouterr().err


def test_figures_written(tmp_path):
    out = tmp_path / 'fig'
    assert main(['equilibrium-solve', '--system', 'demo:m0', '--grid', '512', '--out', str(out)]) == 0
    assert (out / 'equilibrium.png').exists() and (out / 'component_0.csv').exists()


def test_type2_command_needs_m1_zero(tmp_path):
    code, _ = _run(tmp_path, 'quad-table', '--system', 'demo:11', '--n', '2,2')
    assert code == 1


def test_unknown_identity(tmp_path):
    code, _ = _run(tmp_path, 'reduce-verify', '--id', 'NOPE')
    assert code == 1


def test_asymptotics_ratio_runs(tmp_path):
    code, out = _run(tmp_path, 'asymptotics', '--system', 'demo:m0', '--kind', 'ratio', '--count', '4')
    assert code == 0 and (out / 'asymptotics_ratio.csv').exists()


def test_parse_error_exits_one():
    assert main(['hp-solve']) == 1
    assert main(['quad-table', '--system', 'demo:01', '--n', 'x,y', '--no-figures']) == 1
