import pytest

from qlpay import cli
from qlpay.harness.security import SecurityLedger

HONEST = "INVOKE A#50\nINVOKE B#20\nHONEST A MINT 30\nHONEST A PAY B 0\nHONEST B REDEEM 0\n"


@pytest.fixture
def script(tmp_path):
    def write(text, name="s.scn"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


def test_defaults():
    cfg = cli.parse_config(["fuzz"])
    assert (cfg.seed, cfg.backend, cfg.d0, cfg.t_tr, cfg.t_r, cfg.trials) == (0, None, 10, 100, 50, 1000)


class TestRun:
    def test_honest_passes(self, script, capsys):
        assert cli.main(["run", script(HONEST)]) == 0
        out, err = capsys.readouterr()
        assert len(out.splitlines()) == 5
        assert "final net 0" in err

    def test_trace_to_file(self, script, tmp_path):
        out = tmp_path / "trace.tsv"
        assert cli.main(["run", script(HONEST), "--out", str(out)]) == 0
        assert out.read_text().count("\n") == 5

    def test_unknown_keyword(self, script, capsys):
        assert cli.main(["run", script("INVOKE A#5\n\nWARP 3\n")]) == 1
        assert "line 3" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert cli.main(["run", str(tmp_path / "none.scn")]) == 1

    def test_bad_flag(self):
        assert cli.main(["run", "--backend", "quantum", "x.scn"]) == 1

    def test_stubbed_bookkeeping_exits_2(self, script, monkeypatch, capsys):
        monkeypatch.setattr(SecurityLedger, "record_honest_to_adversary", lambda self, d, coins: None)
        text = "INVOKE A#50\nINVOKE M#0\nCORRUPT M\n# pay the adversary\nHONEST A MINT 10\nHONEST A PAY M 0\nADV PAY M A\n"
        assert cli.main(["run", script(text)]) == 2
        assert "step 6 (line 7)" in capsys.readouterr().err

    def test_toy_backend(self, script):
        assert cli.main(["run", script(HONEST), "--backend", "toy"]) == 0


class TestFuzz:
    def test_zero_trials(self):
        assert cli.main(["fuzz", "--trials", "0"]) == 1

    def test_deterministic_summary(self, capsys):
        assert cli.main(["fuzz", "--trials", "10", "--seed", "4"]) == 0
        first = capsys.readouterr().out
        assert cli.main(["fuzz", "--trials", "10", "--seed", "4"]) == 0
        assert capsys.readouterr().out == first
        assert "traces with max_net > 0: 0" in first

    def test_violation_writes_repro(self, monkeypatch, tmp_path, capsys):
        monkeypatch.setattr(SecurityLedger, "on_corrupt", lambda self, coins, bv, pending=0: self._book("corrupt", held=coins))
        out = tmp_path / "repro.scn"
        code = cli.main(["fuzz", "--trials", "5", "--out", str(out)])
        assert code == 2 and out.exists()
        assert out.read_text().startswith("# shrunk repro")


class TestGames:
    def test_ideal_refused(self):
        assert cli.main(["games", "--backend", "ideal"]) == 1

    def test_toy_table(self, capsys):
        assert cli.main(["games", "--trials", "2000"]) == 0
        out = capsys.readouterr().out
        assert out.count("yes") == len(out.splitlines()) - 1


def test_selftest(capsys):
    assert cli.main(["selftest"]) == 0
    assert capsys.readouterr().out.count("PASS") == len(cli.DEMOS)
