"""
End-to-end tests for the command-line launcher
"""

import json

import pytest

from reporting import read_csv_probs
from run_spread import main

DIAMOND = "# diamond\n4\n0 1 0.5\n0 2 0.5\n1 3 0.5\n2 3 0.5\n"


@pytest.fixture
def files(tmp_path):
    graph = tmp_path / "diamond.txt"
    graph.write_text(DIAMOND)
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"logging": {"level": "WARNING", "file": ""}}))
    return {'graph': str(graph), 'config': str(config), 'dir': tmp_path}


def run(files, *args):
    return main(list(args) + ['--config', files['config']])


def test_spread_prints_json(files, capsys):
    assert run(files, 'spread', '--graph', files['graph'], '--seeds', '0') == 0
    report = json.loads(capsys.readouterr().out)
    assert report['probs'] == {'1': 0.5, '2': 0.5, '3': 0.4375}
    assert report['sigma'] == 1.4375
    assert report['omega'] == 2


def test_spread_writes_csv_and_dump(files, capsys):
    out = files['dir'] / "report.csv"
    dump = files['dir'] / "diagram.txt"
    code = run(files, 'spread', '--graph', files['graph'], '--seeds', '0',
               '--format', 'csv', '--out', str(out), '--dump', str(dump))
    assert code == 0
    assert read_csv_probs(out.read_text())['3'] == 0.4375
    assert "# STC diagram" in dump.read_text()
    assert "sigma(S) = 1.4375" in capsys.readouterr().out


def test_single_target(files, capsys):
    assert run(files, 'single', '--graph', files['graph'], '--seeds', '0', '--target', '3') == 0
    assert json.loads(capsys.readouterr().out)['probs'] == {'3': 0.4375}


def test_oracle_and_mc(files, capsys):
    assert run(files, 'oracle', '--graph', files['graph'], '--seeds', '0') == 0
    assert json.loads(capsys.readouterr().out)['meta']['subsets_evaluated'] == 16
    assert run(files, 'mc', '--graph', files['graph'], '--seeds', '0', '--samples', '2000', '--rng-seed', '1') == 0
    assert json.loads(capsys.readouterr().out)['meta']['samples'] == 2000


def test_verify_corpus_passes(files, capsys):
    assert run(files, 'verify', '--trials', '5', '--rng-seed', '3') == 0
    assert "oracle delta" in capsys.readouterr().out


def test_greedy(files, capsys):
    assert run(files, 'greedy', '--graph', files['graph'], '--k', '1') == 0
    assert json.loads(capsys.readouterr().out)['seeds'] == ['0']


def test_bench(files, capsys):
    assert run(files, 'bench', '--family', 'path', '--sizes', '10,20') == 0
    assert len(json.loads(capsys.readouterr().out)['rows']) == 2


def test_missing_argument_exits_one(files, capsys):
    assert run(files, 'spread', '--graph', files['graph']) == 1
    assert "needs --seeds" in capsys.readouterr().err


def test_bad_graph_file_exits_one(files, capsys):
    bad = files['dir'] / "bad.txt"
    bad.write_text("2\n0 1 1.5\n")
    assert run(files, 'spread', '--graph', str(bad), '--seeds', '0') == 1
    assert "probability out of range" in capsys.readouterr().err
    assert run(files, 'spread', '--graph', str(files['dir'] / "absent.txt"), '--seeds', '0') == 1


def test_graph_file_that_is_not_utf8_exits_one(files, capsys):
    bad = files['dir'] / "latin1.txt"
    bad.write_bytes("2\ncafé bar 0.5\n".encode('latin-1'))
    assert run(files, 'spread', '--graph', str(bad), '--seeds', 'bar') == 1
    assert "not valid UTF-8" in capsys.readouterr().err


def test_zero_samples_exits_one(files, capsys):
    assert run(files, 'mc', '--graph', files['graph'], '--seeds', '0', '--samples', '0') == 1
    assert "sample count must be at least 1" in capsys.readouterr().err


def test_width_guard_exits_two(files, capsys):
    assert run(files, 'spread', '--graph', files['graph'], '--seeds', '0', '--max-width', '1') == 2
    assert "2^4" in capsys.readouterr().err


def test_missing_config_exits_one(files, capsys):
    assert main(['spread', '--graph', files['graph'], '--seeds', '0',
                 '--config', str(files['dir'] / "absent.json")]) == 1


def test_unknown_command_is_rejected():
    with pytest.raises(SystemExit):
        main(['draw'])
