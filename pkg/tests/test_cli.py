"""Tests for the command-line interface."""

import json
import math

import pytest

from bellsurvey.cli import main, parse_args
from bellsurvey.harness import load_records
from bellsurvey.storage import save_state


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# =============================================================================
# Test: Bounds and nets
# =============================================================================


class TestBoundsCommand:
    def test_theorem1(self, capsys):
        code, out, _ = run(capsys, 'bounds', '--theorem', '1', '--d', '2', '--n', '2',
                           '--v', '2.0', '--delta', '0.5')
        assert code == 0
        report = json.loads(out)
        assert report['theorem'] == 1
        assert report['tail_bound_log10'] == pytest.approx(34.12, abs=0.01)
        assert report['lambda'] == 0.0

    def test_theorem2_auto_delta(self, capsys):
        code, out, _ = run(capsys, 'bounds', '--theorem', '2', '--d', '2', '--n', '6',
                           '--v', '3.0', '--lambda', '0.3')
        assert code == 0
        report = json.loads(out)
        assert report['theorem'] == 2
        assert 0 < report['delta_used'] < 2.0

    def test_precondition_failure_exits_2(self, capsys):
        code, out, err = run(capsys, 'bounds', '--theorem', '1', '--d', '2', '--n', '3',
                             '--v', '1.2', '--delta', '0.5')
        assert code == 2
        assert out == ""
        assert err.startswith("error:")

    def test_missing_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(['bounds', '--theorem', '1', '--d', '2', '--n', '3'])
        assert exc.value.code == 2
        assert "--v" in capsys.readouterr().err


class TestNetCommand:
    def test_two_qubits(self, capsys):
        code, out, _ = run(capsys, 'net', '--d', '2', '--n', '2', '--delta', '0.5')
        assert code == 0
        net = json.loads(out)
        assert net['epsilon'] == 1 / 128
        assert net['m'] == 127

    def test_bad_delta(self, capsys):
        with pytest.raises(SystemExit):
            main(['net', '--d', '2', '--n', '2', '--delta', 'small'])


# =============================================================================
# Test: Config files
# =============================================================================


class TestConfigFile:
    def test_values_from_file(self, capsys, tmp_path):
        path = tmp_path / "net.conf"
        path.write_text("d = 2\nn = 2\ndelta = 0.5\n")
        code, out, _ = run(capsys, 'net', '--config', str(path))
        assert code == 0
        assert json.loads(out)['m'] == 127

    def test_command_line_wins(self, capsys, tmp_path):
        path = tmp_path / "net.conf"
        path.write_text("d = 2\nn = 2\ndelta = 0.5\n")
        code, out, _ = run(capsys, 'net', '--config', str(path), '--delta', '1.0')
        assert code == 0
        assert json.loads(out)['epsilon'] == 1 / 64

    def test_survey_keys(self, tmp_path):
        path = tmp_path / "survey.conf"
        path.write_text("d=3\nn=2\ntrials=4\nseed=9\nmode=fixed\nv_grid=0.5,1.0\n"
                        f"out={tmp_path / 'r.csv'}\ntiming=true\nmax_sweeps=40\n")
        args = parse_args(['survey', '--config', str(path)])
        assert (args.d, args.n, args.trials, args.seed) == (3, 2, 4, 9)
        assert args.v_grid == [0.5, 1.0]
        assert args.timing is True
        assert args.max_sweeps == 40

    def test_unknown_key(self, capsys, tmp_path):
        path = tmp_path / "net.conf"
        path.write_text("d = 2\nflavour = strange\n")
        code, _, err = run(capsys, 'net', '--config', str(path))
        assert code == 2
        assert "flavour" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, 'net', '--config', str(tmp_path / "absent.conf"))
        assert code == 2
        assert "cannot read" in err


# =============================================================================
# Test: Reference values and optimization
# =============================================================================


class TestGhzCommand:
    def test_balanced_ghz3(self, capsys):
        code, out, _ = run(capsys, 'ghz', '--n', '3')
        assert code == 0
        data = json.loads(out)
        assert data['qnl'] == pytest.approx(2.0, abs=1e-12)
        assert abs(data['difference']) < 1e-12

    def test_unbalanced(self, capsys):
        code, out, _ = run(capsys, 'ghz', '--n', '3', '--alpha', '1', '--beta', '0')
        assert code == 0
        assert json.loads(out)['qnl'] == pytest.approx(0.0, abs=1e-12)

    def test_unnormalized_exits_2(self, capsys):
        code, _, _ = run(capsys, 'ghz', '--n', '3', '--alpha', '0.9', '--beta', '0.1')
        assert code == 2


class TestOptimizeCommand:
    def test_bell_state(self, capsys, tmp_path, bell_state):
        path = save_state(tmp_path / "bell.json", bell_state)
        code, out, _ = run(capsys, 'optimize', '--state-file', str(path), '--restarts', '20', '--seed', '1')
        assert code == 0
        result = json.loads(out)
        assert result['value'] == pytest.approx(math.sqrt(2), abs=1e-6)
        assert result['restarts_used'] == 20

    def test_missing_state_file(self, capsys, tmp_path):
        code, _, err = run(capsys, 'optimize', '--state-file', str(tmp_path / "none.json"))
        assert code == 2
        assert "none.json" in err


# =============================================================================
# Test: Surveys
# =============================================================================


class TestSurveyCommands:
    def test_survey_writes_records(self, capsys, tmp_path):
        out_path = tmp_path / "reports" / "survey.csv"
        code, out, _ = run(capsys, 'survey', '--d', '2', '--n', '3', '--trials', '5', '--seed', '1',
                           '--mode', 'fixed', '--v-grid', '1.5,0.5', '--out', str(out_path))
        assert code == 0
        summary = json.loads(out)
        assert [row['v'] for row in summary['tail_table']] == [0.5, 1.5]
        assert 'records' not in summary
        assert len(load_records(out_path)) == 5

    def test_survey_json(self, capsys, tmp_path):
        out_path = tmp_path / "survey.json"
        code, _, _ = run(capsys, 'survey', '--d', '2', '--n', '2', '--trials', '3', '--seed', '1',
                         '--mode', 'optimized', '--restarts', '2', '--max-sweeps', '30',
                         '--v-grid', '1.2', '--out', str(out_path), '--format', 'json')
        assert code == 0
        data = json.loads(out_path.read_text())
        assert data['config']['mode'] == 'optimized'
        assert len(data['records']) == 3

    def test_survey_missing_flags(self, capsys):
        with pytest.raises(SystemExit):
            main(['survey', '--d', '2'])

    def test_noise_sweep_csv(self, capsys, tmp_path):
        out_path = tmp_path / "sweep.csv"
        code, out, _ = run(capsys, 'noise-sweep', '--d', '2', '--n', '3', '--trials', '4', '--seed', '2',
                           '--mode', 'fixed', '--v-grid', '0.5', '--lambdas', '0,0.5',
                           '--out', str(out_path))
        assert code == 0
        summaries = json.loads(out)
        assert [s['lambda'] for s in summaries] == [0.0, 0.5]
        assert summaries[1]['ghz_control'] == pytest.approx(0.25, abs=1e-12)
        records = load_records(out_path)
        assert [r.lam for r in records] == [0.0] * 4 + [0.5] * 4

    def test_noise_sweep_rejects_qudits(self, capsys, tmp_path):
        code, _, _ = run(capsys, 'noise-sweep', '--d', '3', '--n', '2', '--trials', '2', '--seed', '2',
                         '--mode', 'fixed', '--v-grid', '0.5', '--lambdas', '0.1',
                         '--out', str(tmp_path / "x.csv"))
        assert code == 2
