"""Command-line entry point: run, fuzz, games, selftest.

Exit codes: 0 pass, 1 usage or parse error, 2 property violation.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, TextIO

from qlpay.harness import Grammar, ScenarioError, fuzz, parse_scenario, run_scenario
from qlpay.lightning.toy import GAME_SUITE, estimate, exact_rates, toy_setup

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2


@dataclass
class RunConfig:
    subcommand: str
    scenario_path: Optional[str] = None
    seed: int = 0
    backend: Optional[str] = None
    d0: int = 10
    t_tr: int = 100
    t_r: int = 50
    trials: int = 1000
    output_path: Optional[str] = None


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--backend", choices=["ideal", "toy"], default=None)
    common.add_argument("--d0", type=int, default=10)
    common.add_argument("--ttr", dest="t_tr", type=int, default=100)
    common.add_argument("--tr", dest="t_r", type=int, default=50)
    common.add_argument("--trials", type=int, default=1000)
    common.add_argument("--out", dest="output_path", default=None)
    parser = argparse.ArgumentParser(prog="qlpay", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    run = sub.add_parser("run", parents=[common], help="execute a scenario file and emit its trace")
    run.add_argument("scenario_path")
    sub.add_parser("fuzz", parents=[common], help="run randomly generated adversarial scenarios")
    sub.add_parser("games", parents=[common], help="estimate toy lightning game win rates")
    sub.add_parser("selftest", parents=[common], help="run the bundled demo scenarios")
    return parser


def parse_config(argv: Optional[list[str]] = None) -> RunConfig:
    return RunConfig(**vars(_parser().parse_args(argv)))


def _scenario_config(cfg: RunConfig) -> dict:
    return dict(seed=cfg.seed, backend=cfg.backend or "ideal", d0=cfg.d0, t_tr=cfg.t_tr, t_r=cfg.t_r)


def _emit(text: str, path: Optional[str], out: TextIO) -> None:
    if path:
        Path(path).write_text(text)
    else:
        out.write(text)


def cmd_run(cfg: RunConfig, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    try:
        text = Path(cfg.scenario_path).read_text()
        scenario = parse_scenario(text, **_scenario_config(cfg))
    except (OSError, ScenarioError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    trace = run_scenario(scenario)
    _emit(trace.to_text(), cfg.output_path, out)
    bad = trace.first_violation()
    if bad is not None:
        line = scenario.position(bad.step - 1)
        print(f"violation at step {bad.step} (line {line}): {bad.event}: {', '.join(bad.violations)}", file=err)
        return EXIT_VIOLATION
    last = trace.records[-1].net if trace.records else 0
    print(f"ok: {len(trace.records)} events, final net {last}, max_net {trace.max_net}", file=err)
    return EXIT_OK


def cmd_fuzz(cfg: RunConfig, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    if cfg.trials < 1:
        print("error: --trials must be at least 1", file=err)
        return EXIT_USAGE
    config = _scenario_config(cfg)
    del config["seed"]  # per-trial seeds derive from --seed
    grammar = Grammar(t_tr=cfg.t_tr)
    if config["backend"] == "toy":
        grammar.cert_hex, grammar.serial_hex = 2, 1
    report = fuzz(cfg.trials, cfg.seed, grammar, **config)
    out.write(report.summary())
    if report.violating:
        path = cfg.output_path or "fuzz_repro.scn"
        bad = report.repro
        header = f"# shrunk repro: seed {bad.seed} backend {bad.backend} d0 {bad.d0} ttr {bad.t_tr} tr {bad.t_r}\n"
        Path(path).write_text(header + bad.render())
        out.write(f"repro written to {path} (run with --seed {bad.seed})\n")
        return EXIT_VIOLATION
    return EXIT_OK


def _sigma(p: float, trials: int) -> float:
    return math.sqrt(p * (1 - p) / trials)


def cmd_games(cfg: RunConfig, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    if (cfg.backend or "toy") != "toy":
        print("error: games run on the toy backend only", file=err)
        return EXIT_USAGE
    if cfg.trials < 1:
        print("error: --trials must be at least 1", file=err)
        return EXIT_USAGE
    ctx = toy_setup(4, 2, 2, cfg.seed)
    exact = exact_rates(ctx)
    lines = [f"{'game':34s} {'empirical':>10s} {'exact':>10s} {'3 sigma':>10s}  ok"]
    failed = 0
    for name, game, adversary in GAME_SUITE:
        rate = estimate(game, ctx, adversary, cfg.trials)
        band = 3 * _sigma(exact[name], cfg.trials)
        ok = abs(rate - exact[name]) <= band
        failed += not ok
        lines.append(f"{name:34s} {rate:10.4f} {exact[name]:10.4f} {band:10.4f}  {'yes' if ok else 'NO'}")
    _emit("\n".join(lines) + "\n", cfg.output_path, out)
    return EXIT_OK if not failed else EXIT_VIOLATION


DEMOS = ("honest_lifecycle.scn", "lost_note_claim.scn", "malicious_claim.scn", "double_spend.scn")


def cmd_selftest(cfg: RunConfig, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    failed = 0
    for name in DEMOS:
        text = resources.files("qlpay.scenarios").joinpath(name).read_text()
        trace = run_scenario(parse_scenario(text, **_scenario_config(cfg)))
        ok = trace.first_violation() is None and trace.max_net <= 0
        failed += not ok
        out.write(f"{'PASS' if ok else 'FAIL'} {name} (max_net {trace.max_net})\n")
    return EXIT_OK if not failed else EXIT_VIOLATION


COMMANDS = {"run": cmd_run, "fuzz": cmd_fuzz, "games": cmd_games, "selftest": cmd_selftest}


def main(argv: Optional[list[str]] = None) -> int:
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    return COMMANDS[cfg.subcommand](cfg)


if __name__ == "__main__":
    raise SystemExit(main())
