"""Command-line entry point: ``plsauth fer|proximity|session|attack``.

Exit codes: 0 success, 1 an expectation failed (REJECT outcome, failing
scenario), 2 usage or configuration error. Every command is deterministic
given ``--seed``.
"""

from __future__ import annotations

import argparse
import configparser
import pickle
import sys
from collections import Counter
from pathlib import Path

from .coding import load_any
from .coding.base import Family
from .crypto import derive_rng
from .harness import (ScenarioError, builtin_scenarios, get_scenario,
                      load_scenario_file, run_scenario)
from .harness.lifecycle import run_lifecycle, states_agree
from .protocol import (SKG_CODE, SKG_DECODER_PARAMS, DirectChannel, EmergencyExhausted,
                       RadioEnvironment, ResumptionUnavailable, Server, authenticate, enroll,
                       resume)
from .proximity import SCENARIOS, proximity_csv, run_proximity_experiment
from .puf import PufDevice
from .skg import SWEEP_PARAM, FerExperiment, results_csv, run_fer_sweep

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        text = Path(path).read_text()
        parser.read_string("[config]\n" + text)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise UsageError(f"cannot parse config {path}: {exc}") from exc
    return dict(parser["config"])


def _pick(args, cfg, name, conv, default=None):
    value = getattr(args, name, None)
    if value is None and name in cfg:
        try:
            value = conv(cfg[name])
        except ValueError as exc:
            raise UsageError(f"config key {name}: {exc}") from exc
    return default if value is None else value


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def _sweep_values(text: str) -> list:
    out = []
    for tok in text.replace(",", " ").split():
        out.append(None if tok.lower() in ("bp", "none") else int(tok))
    return out


def _emit(text: str, out):
    """Results go to ``out`` or stdout; ``--quiet`` only silences progress."""
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_transcript(channel, out):
    # session summaries use stdout, so transcripts are only written on request
    if out:
        Path(out).write_text("".join(e.line() + "\n" for e in channel.transcript))


def _say(args, msg: str):
    if not args.quiet:
        print(msg)


# -- fer ----------------------------------------------------------------------------

def cmd_fer(args) -> int:
    cfg = read_config(args.config) if args.config else {}
    code_name = _pick(args, cfg, "code", str)
    if code_name is None:
        raise UsageError("fer needs a code (config key 'code' or --code)")
    try:
        code = load_any(code_name)
    except (KeyError, OSError, ValueError) as exc:
        raise UsageError(f"cannot load code {code_name!r}: {exc}") from exc
    trials = _pick(args, cfg, "trials", int)
    seed = _pick(args, cfg, "seed", int, 0)
    p_grid = _pick(args, cfg, "p_grid", _floats)
    params = _pick(args, cfg, "params", _sweep_values)
    if trials is None or trials < 1:
        raise UsageError("trials must be a positive integer")
    if not p_grid or any(not 0 < p < 0.5 for p in p_grid):
        raise UsageError("p_grid must list crossover probabilities in (0, 0.5)")
    if params is None:
        params = [code.default_params().get(SWEEP_PARAM[code.family])]
    if None in params and code.family != Family.LDPC:
        raise UsageError("'bp' is only meaningful for LDPC codes")
    exp = FerExperiment(code, params, p_grid, trials, seed)
    run_fer_sweep(exp, None if args.quiet else
                  lambda i, p: print(f"p={p} done ({i + 1}/{len(p_grid)})", file=sys.stderr))
    _emit(results_csv(exp.results), args.out)
    return EXIT_OK


# -- proximity --------------------------------------------------------------------

def cmd_proximity(args) -> int:
    cfg = read_config(args.config) if args.config else {}
    scenario = _pick(args, cfg, "scenario", str, "auditorium")
    if scenario not in SCENARIOS:
        raise UsageError(f"unknown scenario {scenario!r}; choose from {sorted(SCENARIOS)}")
    trials = _pick(args, cfg, "trials", int, 500)
    seed = _pick(args, cfg, "seed", int, 0)
    distances = _pick(args, cfg, "distances", _floats, [1.0, 3.0, 6.0])
    if trials < 1:
        raise UsageError("trials must be a positive integer")
    rows, confusion = run_proximity_experiment(scenario, trials, seed, tuple(distances))
    _emit(proximity_csv(scenario, rows, confusion), args.out)
    if args.out and not args.quiet:
        for d, frac in confusion.items():
            print(f"d={d} m: " + " ".join(f"{k}={v:.3f}" for k, v in frac.items()))
    return EXIT_OK


# -- session ----------------------------------------------------------------------

def _session_settings(args):
    cfg = read_config(args.config) if args.config else {}
    settings = {
        "seed": _pick(args, cfg, "seed", int, 0),
        "p": _pick(args, cfg, "p", float, 0.05),
        "p_intra": _pick(args, cfg, "p_intra", float, 0.05),
        "code": _pick(args, cfg, "code", str, SKG_CODE),
        "list_size": _pick(args, cfg, "list_size", int, SKG_DECODER_PARAMS["list_size"]),
        "resumptions": _pick(args, cfg, "resumptions", int, 3),
        "trials": _pick(args, cfg, "trials", int, 1),
    }
    if not 0 <= settings["p"] < 0.5 or not 0 <= settings["p_intra"] < 0.5:
        raise UsageError("p and p_intra must lie in [0, 0.5)")
    if settings["trials"] < 1:
        raise UsageError("trials must be a positive integer")
    try:
        code = load_any(settings["code"])
    except (KeyError, OSError, ValueError) as exc:
        raise UsageError(f"cannot load code {settings['code']!r}: {exc}") from exc
    params = {"list_size": settings["list_size"]} if code.family == Family.POLAR else None
    return settings, code, params


def _load_state(path):
    if path is None or not Path(path).exists():
        return None
    with open(path, "rb") as fh:  # local, self-written state file
        return pickle.load(fh)


def _save_state(path, state):
    if path is not None:
        with open(path, "wb") as fh:
            pickle.dump(state, fh)


def _run_label(run) -> str:
    srv = run.server.label() if run.server is not None else "-"
    return f"{run.phase}: node={run.node.label()} server={srv}"


def cmd_session(args) -> int:
    settings, code, params = _session_settings(args)
    seed = settings["seed"]
    env = RadioEnvironment(p=settings["p"])

    if settings["trials"] > 1:
        if args.mode not in ("auth", "full"):
            raise UsageError("--trials > 1 is only supported for auth and full")
        tally = Counter()
        channel = DirectChannel()
        for i in range(settings["trials"]):
            res = run_lifecycle(seed, i, settings["p"], settings["p_intra"],
                                settings["resumptions"] if args.mode == "full" else 0,
                                code, params, env, channel)
            tally["SUCCESS" if res.success else res.failure_reason] += 1
        _write_transcript(channel, args.out)
        for key, count in sorted(tally.items(), key=lambda kv: (-kv[1], kv[0])):
            _say(args, f"{count:6d}  {key}")
        return EXIT_OK if tally["SUCCESS"] == settings["trials"] else EXIT_FAIL

    state = _load_state(args.state)
    if state is not None:
        node, server, step = state["node"], state["server"], state["step"]
    else:
        node = server = None
        step = 0

    def fresh_enroll():
        srv = Server()
        device = PufDevice.manufacture("node-A", derive_rng(seed, "device"),
                                       p_intra=settings["p_intra"])
        nd, _ = enroll(device, srv, derive_rng(seed, "enroll"))
        return nd, srv

    channel = DirectChannel()
    runs = []
    try:
        if args.mode == "enroll":
            if node is not None:
                raise UsageError("state file already holds an enrolled device")
            node, server = fresh_enroll()
            _say(args, f"ENROLLED alias={node.alias.to_bytes().hex()} "
                       f"emergency_sets={len(node.emergency)}")
        elif args.mode == "resume":
            if node is None or node.z is None or node.needs_recovery:
                raise UsageError("resume needs a state file from a completed authentication")
            step += 1
            runs.append(resume(node, server, channel, code, args.early_data.encode(), env,
                               derive_rng(seed, "session", step, "node"), params,
                               derive_rng(seed, "session", step, "server")))
        else:
            if node is None:
                node, server = fresh_enroll()
            step += 1
            runs.append(authenticate(node, server, channel, code, env,
                                     derive_rng(seed, "session", step, "node"), params,
                                     derive_rng(seed, "session", step, "server")))
            if args.mode == "full":
                for _ in range(settings["resumptions"]):
                    if not runs[-1].keys_agree():
                        break
                    step += 1
                    runs.append(resume(node, server, channel, code, args.early_data.encode(),
                                       env, derive_rng(seed, "session", step, "node"), params,
                                       derive_rng(seed, "session", step, "server")))
    except ResumptionUnavailable as exc:
        raise UsageError(str(exc)) from exc
    except EmergencyExhausted as exc:
        _say(args, f"EmergencyExhausted: {exc}")
        return EXIT_FAIL

    for run in runs:
        _say(args, _run_label(run) + (" keys-agree" if run.keys_agree() else ""))
    if runs:
        _say(args, "state-synchronized" if states_agree(node, server) else "state-diverged")
    _write_transcript(channel, args.out)
    _save_state(args.state, {"node": node, "server": server, "step": step})
    return EXIT_OK if all(r.keys_agree() for r in runs) else EXIT_FAIL


# -- attack -----------------------------------------------------------------------

def cmd_attack(args) -> int:
    if args.scenario_file:
        try:
            scenarios = [load_scenario_file(args.scenario_file)]
        except OSError as exc:
            raise UsageError(f"cannot read scenario file: {exc}") from exc
        except ScenarioError as exc:
            raise UsageError(str(exc)) from exc
    elif args.target in (None, "suite"):
        scenarios = builtin_scenarios()
    else:
        try:
            scenarios = [get_scenario(args.target)]
        except KeyError as exc:
            raise UsageError(exc.args[0]) from exc
    if args.seed is not None:
        for s in scenarios:
            s.seed = args.seed
    reports = [run_scenario(s) for s in scenarios]
    text = "".join(r.text() for r in reports)
    if args.out:
        Path(args.out).write_text(text)
    if not args.quiet:
        width = max(len(r.name) for r in reports)
        for r in reports:
            print(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  "
                  + "  ".join(f"[{s.node} | {s.server}]" for s in r.steps))
        for r in reports:
            print(r.summary_line())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    common.add_argument("--seed", type=int, help="master seed (default 0)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--trials", type=int, help="Monte-Carlo trials")
    common.add_argument("--quiet", action="store_true", help="suppress progress and summaries")

    parser = argparse.ArgumentParser(prog="plsauth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    fer = sub.add_parser("fer", parents=[common], help="frame-error-rate sweep to CSV")
    fer.add_argument("--code", help="fixture name or path")
    fer.add_argument("--params", type=_sweep_values,
                     help="list sizes / OSD orders / list orders, comma separated")
    fer.add_argument("--p-grid", dest="p_grid", type=_floats, help="comma separated p values")
    fer.set_defaults(func=cmd_fer)

    prox = sub.add_parser("proximity", parents=[common], help="proximity classification to CSV")
    prox.add_argument("--scenario", help="auditorium or library")
    prox.add_argument("--distances", type=_floats, help="true distances in metres")
    prox.set_defaults(func=cmd_proximity)

    sess = sub.add_parser("session", parents=[common], help="run protocol sessions")
    sess.add_argument("mode", choices=["enroll", "auth", "resume", "full"])
    sess.add_argument("--state", help="pickle file carrying node/server state between runs")
    sess.add_argument("--p", type=float, help="channel crossover probability (default 0.05)")
    sess.add_argument("--p-intra", dest="p_intra", type=float, help="PUF bit-flip rate")
    sess.add_argument("--code", help="reconciliation code fixture")
    sess.add_argument("--list-size", dest="list_size", type=int)
    sess.add_argument("--resumptions", type=int, help="resumptions in full mode (default 3)")
    sess.add_argument("--early-data", dest="early_data", default="hello",
                      help="0-RTT payload for resumptions")
    sess.set_defaults(func=cmd_session)

    att = sub.add_parser("attack", parents=[common], help="run attack scenarios")
    att.add_argument("target", nargs="?", help="scenario name or 'suite' (default)")
    att.add_argument("--scenario-file", dest="scenario_file", help="INI scenario definition")
    att.set_defaults(func=cmd_attack)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"plsauth {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
