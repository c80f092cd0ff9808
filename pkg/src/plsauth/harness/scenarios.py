"""Scripted attack scenarios against the protocol state machines.

A scenario enrolls one device, then runs a list of steps (authentication,
resumption or emergency recovery), each with its own adversary script and
the outcome it expects from each party. Scenario files are INI documents::

    [scenario]
    name = replay-request
    seed = 11
    emergency_sets = 4

    [step.1]
    kind = auth
    expect_node = SUCCESS
    expect_server = SUCCESS

    [step.2]
    kind = auth
    script = REPLAY:0
    expect_node = REJECT(timeout)
    expect_server = REJECT(bad-alias)

Optional step keys: ``actor`` (node, clone, tampered), ``server`` (honest,
rogue), ``server_distances``, ``tx_offset_db``, ``early_data``. A missing
``script`` delivers everything; ``*`` as an expectation matches anything
and ``-`` means the party never took part.
"""

from __future__ import annotations

import configparser
import copy
import threading
from dataclasses import dataclass, field, replace

from ..coding import builtin_code
from ..crypto import NonceRegistry, derive_rng
from ..protocol.core import (DEFAULT_EMERGENCY_SETS, SKG_CODE, SKG_DECODER_PARAMS,
                             EmergencyExhausted, ResumptionUnavailable, Server, audit_state, enroll)
from ..protocol.runner import RadioEnvironment, authenticate, recover_desync, resume
from ..proximity import SCENARIOS as PATH_LOSS
from ..puf import PufDevice
from .channel import DELIVER, DROP, AdversarialChannel, ScriptExhausted, inject, modify, \
    parse_script, replay

REPORT_VERSION = "attack-report-v1"
STEP_KINDS = ("auth", "resume", "recover")
ACTORS = ("node", "clone", "tampered")
SERVERS = ("honest", "rogue")
EXHAUSTED = "EmergencyExhausted"
UNAVAILABLE = "ResumptionUnavailable"
ABSENT = "-"


class ScenarioError(ValueError):
    """A scenario definition is invalid."""


@dataclass
class Step:
    kind: str
    script: list | None = None
    expect_node: str = "SUCCESS"
    expect_server: str = "SUCCESS"
    actor: str = "node"
    server: str = "honest"
    server_distances: tuple | None = None
    tx_offset_db: float = 0.0
    early_data: bytes = b""

    def __post_init__(self):
        if self.kind not in STEP_KINDS:
            raise ScenarioError(f"unknown step kind {self.kind!r}")
        if self.actor not in ACTORS:
            raise ScenarioError(f"unknown actor {self.actor!r}")
        if self.server not in SERVERS:
            raise ScenarioError(f"unknown server {self.server!r}")


@dataclass
class AttackScenario:
    name: str
    steps: list
    description: str = ""
    seed: int = 0
    p: float = 0.05
    p_intra: float = 0.05
    emergency_sets: int = DEFAULT_EMERGENCY_SETS
    code: str = SKG_CODE
    list_size: int = SKG_DECODER_PARAMS["list_size"]
    environment: str = "auditorium"
    tamper_rate: float = 0.25

    def __post_init__(self):
        if not self.steps:
            raise ScenarioError(f"scenario {self.name!r} has no steps")
        if self.environment not in PATH_LOSS:
            raise ScenarioError(f"unknown environment {self.environment!r}")


@dataclass
class StepReport:
    index: int
    kind: str
    node: str
    server: str
    expect_node: str
    expect_server: str
    audit: str
    adversary_active: bool
    keys_agree: bool
    messages: int = 0

    @property
    def passed(self) -> bool:
        ok_state = self.audit != "broken" or self.expect_node == EXHAUSTED
        return (_matches(self.node, self.expect_node) and _matches(self.server, self.expect_server)
                and ok_state)

    @property
    def false_accept(self) -> bool:
        accepted = ("SUCCESS", "DESYNC_RECOVERED")
        return self.adversary_active and self.node in accepted and self.server in accepted

    def line(self) -> str:
        return (f"  step {self.index} {self.kind:<7} node={self.node} (expect {self.expect_node})"
                f"  server={self.server} (expect {self.expect_server})  audit={self.audit}"
                f"  adversary={'active' if self.adversary_active else 'passive'}"
                f"  {'ok' if self.passed else 'MISMATCH'}")


def _matches(actual: str, expected: str) -> bool:
    return expected == "*" or actual == expected


@dataclass
class ScenarioReport:
    name: str
    steps: list
    transcript: list = field(default_factory=list)
    error: str = ""

    @property
    def false_accepts(self) -> int:
        return sum(s.false_accept for s in self.steps)

    @property
    def first_divergence(self) -> int | None:
        for s in self.steps:
            if not s.passed:
                return s.index
        return None

    @property
    def passed(self) -> bool:
        return not self.error and self.first_divergence is None and self.false_accepts == 0

    def summary_line(self) -> str:
        div = self.first_divergence
        return (f"RESULT scenario={self.name} result={'PASS' if self.passed else 'FAIL'} "
                f"steps={len(self.steps)} messages={len(self.transcript)} "
                f"false_accepts={self.false_accepts} "
                f"first_divergence={'-' if div is None else div}"
                + (f" error={self.error!r}" if self.error else ""))

    def text(self) -> str:
        lines = [f"# {REPORT_VERSION}", f"scenario {self.name}: {'PASS' if self.passed else 'FAIL'}"]
        lines += [s.line() for s in self.steps]
        if self.error:
            lines.append(f"  error: {self.error}")
        lines.append("transcript:")
        lines += [f"  {e.index} {e.line()}" for e in self.transcript]
        lines.append(self.summary_line())
        return "\n".join(lines) + "\n"


def copy_server(server: Server) -> Server:
    """A second server holding a copy of the whole device database (stolen keys)."""
    rogue = Server(server.name)
    for key, rec in server.records.items():
        stolen = replace(rec, emergency=dict(rec.emergency),
                         used_nonces=NonceRegistry(set(rec.used_nonces.seen)),
                         lock=threading.Lock())
        rogue.records[key] = stolen
        rogue.bind_alias(stolen, stolen.alias)
        for alias in stolen.emergency:
            rogue._aliases[alias] = key
    return rogue


def run_scenario(scenario: AttackScenario) -> ScenarioReport:
    """Execute every step; deterministic for a given scenario (and seed)."""
    seed = scenario.seed
    code = builtin_code(scenario.code)
    params = {"list_size": scenario.list_size} if code.family.value == "polar" else None
    server = Server()
    device = PufDevice.manufacture("node-A", derive_rng(seed, "device"), p_intra=scenario.p_intra)
    node, _ = enroll(device, server, derive_rng(seed, "enroll"),
                     emergency_count=scenario.emergency_sets)
    channel = AdversarialChannel(rng=derive_rng(seed, "adversary"))
    path_loss = PATH_LOSS[scenario.environment]
    reports = []
    error = ""

    for i, step in enumerate(scenario.steps, start=1):
        env = RadioEnvironment(p=scenario.p, path_loss=path_loss, tx_offset_db=step.tx_offset_db)
        if step.server_distances is not None:
            env.server_distances = tuple(step.server_distances)
        if step.actor == "tampered":
            node.device = node.device.tampered(scenario.tamper_rate, b"tamper")
        party = node
        if step.actor == "clone":
            party = copy.deepcopy(node)
            party.device = PufDevice.manufacture(node.device.device_id,
                                                 derive_rng(seed, "clone", i), p_intra=scenario.p_intra)
        srv = copy_server(server) if step.server == "rogue" else server

        channel.load(step.script)
        start = len(channel.transcript)
        rng, srv_rng = derive_rng(seed, "step", i, "node"), derive_rng(seed, "step", i, "server")
        try:
            if step.kind == "auth":
                run = authenticate(party, srv, channel, code, env, rng, params, srv_rng)
            elif step.kind == "recover":
                run = recover_desync(party, srv, channel, code, env, rng, params, srv_rng)
            else:
                run = resume(party, srv, channel, code, step.early_data, env, rng, params, srv_rng)
            node_label = run.node.label()
            server_label = run.server.label() if run.server is not None else ABSENT
            agree = run.keys_agree()
        except EmergencyExhausted:
            node_label, server_label, agree = EXHAUSTED, ABSENT, False
        except ResumptionUnavailable:
            node_label, server_label, agree = UNAVAILABLE, ABSENT, False
        except ScriptExhausted as exc:
            error = f"step {i}: {exc}"
            node_label, server_label, agree = "ScriptExhausted", ABSENT, False
        entries = channel.transcript[start:]
        active = (step.actor != "node" or step.server != "honest"
                  or any(e.action != "DELIVER" for e in entries))
        reports.append(StepReport(i, step.kind, node_label, server_label, step.expect_node,
                                  step.expect_server, audit_state(node, server), active, agree,
                                  len(entries)))
        if error:
            break
    return ScenarioReport(scenario.name, reports, list(channel.transcript), error)


# -- built-in suite ---------------------------------------------------------------

def _auth(**kw) -> Step:
    return Step("auth", **kw)


def _recover() -> Step:
    return Step("recover", expect_node="DESYNC_RECOVERED", expect_server="DESYNC_RECOVERED")


def _dos_scenario() -> AttackScenario:
    """Block every message index of both flows, recovering after each block."""
    steps = []
    blocked_server = ["-", "REJECT(timeout)", "REJECT(timeout)", "SUCCESS"]
    for idx, srv in enumerate(blocked_server):
        steps.append(_auth(script=[DELIVER] * idx + [DROP], expect_node="REJECT(timeout)",
                           expect_server=srv))
        steps.append(_recover())
    for idx, srv in enumerate(["-", "SUCCESS"]):
        steps.append(Step("resume", script=[DELIVER] * idx + [DROP], early_data=b"m",
                          expect_node="REJECT(timeout)", expect_server=srv))
        steps.append(_recover())
    steps.append(_auth())  # all six emergency entries are now spent
    steps.append(_auth(script=[DROP], expect_node="REJECT(timeout)", expect_server="-"))
    steps.append(Step("recover", expect_node=EXHAUSTED, expect_server="-"))
    return AttackScenario("dos-desync", steps, "block each message index, recover via "
                          "emergency aliases until they run out", seed=107, emergency_sets=6)


def builtin_scenarios() -> list[AttackScenario]:
    honest_auth = _auth(script=[DELIVER] * 4)
    return [
        AttackScenario("honest", [
            honest_auth,
            Step("resume", early_data=b"early-1"),
            Step("resume", early_data=b"early-2"),
            Step("resume", early_data=b"early-3"),
            _auth(),
        ], "mutual authentication and three resumptions, all delivered", seed=101),
        AttackScenario("replay-request", [
            honest_auth,
            _auth(script=[replay(0)], expect_node="REJECT(timeout)",
                  expect_server="REJECT(bad-alias)"),
            _recover(),
        ], "old (A_ID || N1) replayed in place of the fresh request", seed=102),
        AttackScenario("replay-c_b", [
            honest_auth,
            _auth(script=[DELIVER, replay(1)], expect_node="REJECT(mac)",
                  expect_server="REJECT(timeout)"),
            _recover(),
        ], "recorded (C_B || T_B) under the previous key answers a new request", seed=103),
        AttackScenario("replay-c_a", [
            honest_auth,
            _auth(script=[DELIVER, DELIVER, replay(2)], expect_node="REJECT(timeout)",
                  expect_server="REJECT(fe-mismatch)"),
            _recover(),
        ], "recorded (C_A || T_A || H') from the previous session", seed=104),
        AttackScenario("impersonate-node", [
            _auth(script=[DELIVER, DELIVER, inject("@forge-response")],
                  expect_node="REJECT(timeout)", expect_server="REJECT(fe-mismatch)"),
            _recover(),
        ], "adversary without the PUF answers the server's challenge", seed=105),
        AttackScenario("impersonate-server-wrong-location", [
            _auth(server="rogue", server_distances=(6.0,), expect_node="REJECT(proximity)",
                  expect_server="-"),
            _auth(),
        ], "rogue server holding stolen keys answers from 6 m", seed=106),
        AttackScenario("impersonate-server-forged-challenge", [
            _auth(script=[DELIVER, inject("@forge-challenge")], expect_node="REJECT(mac)",
                  expect_server="REJECT(timeout)"),
            _recover(),
        ], "adversary answers the request with a challenge under a made-up key", seed=108),
        _dos_scenario(),
        AttackScenario("clone", [
            honest_auth,
            _auth(actor="clone", expect_node="REJECT(timeout)",
                  expect_server="REJECT(fe-mismatch)"),
            _recover(),
            _auth(),
        ], "copied storage on a device with a different PUF", seed=109),
        AttackScenario("tamper", [
            honest_auth,
            _auth(actor="tampered", expect_node="REJECT(timeout)",
                  expect_server="REJECT(fe-mismatch)"),
        ], "physically altered PUF answers the challenge", seed=110),
        AttackScenario("resumption-replay", [
            honest_auth,
            Step("resume", early_data=b"pay 10"),
            Step("resume", script=[replay(4)], early_data=b"pay 20",
                 expect_node="REJECT(timeout)", expect_server="REJECT(bad-alias)"),
            _recover(),
        ], "first resumption flight replayed in place of a new one", seed=111),
        AttackScenario("modify-c_b", [
            _auth(script=[DELIVER, modify(-1)], expect_node="REJECT(mac)",
                  expect_server="REJECT(timeout)"),
            _recover(),
        ], "one bit of T_B flipped in transit", seed=112),
    ]


def scenario_names() -> list[str]:
    return [s.name for s in builtin_scenarios()]


def get_scenario(name: str) -> AttackScenario:
    for s in builtin_scenarios():
        if s.name == name:
            return s
    raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(scenario_names())}")


# -- scenario files ---------------------------------------------------------------

def _expectation(value: str) -> str:
    return value.strip()


def loads_scenario(text: str) -> AttackScenario:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"cannot parse scenario: {exc}") from exc
    if not parser.has_section("scenario"):
        raise ScenarioError("missing [scenario] section")
    head = parser["scenario"]
    try:
        steps = []
        for section in parser.sections():
            if not section.startswith("step"):
                if section != "scenario":
                    raise ScenarioError(f"unexpected section [{section}]")
                continue
            sec = parser[section]
            unknown = set(sec) - {"kind", "script", "expect_node", "expect_server", "actor",
                                  "server", "server_distances", "tx_offset_db", "early_data"}
            if unknown:
                raise ScenarioError(f"[{section}]: unknown keys {sorted(unknown)}")
            dist = sec.get("server_distances")
            steps.append(Step(
                kind=sec.get("kind", "auth").strip(),
                script=parse_script(sec["script"]) if "script" in sec else None,
                expect_node=_expectation(sec.get("expect_node", "SUCCESS")),
                expect_server=_expectation(sec.get("expect_server", "SUCCESS")),
                actor=sec.get("actor", "node").strip(),
                server=sec.get("server", "honest").strip(),
                server_distances=tuple(float(x) for x in dist.split(",")) if dist else None,
                tx_offset_db=sec.getfloat("tx_offset_db", 0.0),
                early_data=sec.get("early_data", "").encode(),
            ))
        return AttackScenario(
            name=head.get("name", "unnamed").strip(), steps=steps,
            description=head.get("description", ""), seed=head.getint("seed", 0),
            p=head.getfloat("p", 0.05), p_intra=head.getfloat("p_intra", 0.05),
            emergency_sets=head.getint("emergency_sets", DEFAULT_EMERGENCY_SETS),
            code=head.get("code", SKG_CODE).strip(),
            list_size=head.getint("list_size", SKG_DECODER_PARAMS["list_size"]),
            environment=head.get("environment", "auditorium").strip(),
            tamper_rate=head.getfloat("tamper_rate", 0.25))
    except ScenarioError:
        raise
    except (ValueError, KeyError) as exc:
        raise ScenarioError(f"invalid scenario: {exc}") from exc


def load_scenario_file(path) -> AttackScenario:
    with open(path, encoding="utf-8") as fh:
        return loads_scenario(fh.read())


def dumps_scenario(scenario: AttackScenario) -> str:
    """Inverse of :func:`loads_scenario` for scenarios without raw-byte injections."""
    lines = ["[scenario]", f"name = {scenario.name}", f"description = {scenario.description}",
             f"seed = {scenario.seed}", f"p = {scenario.p}", f"p_intra = {scenario.p_intra}",
             f"emergency_sets = {scenario.emergency_sets}", f"code = {scenario.code}",
             f"list_size = {scenario.list_size}", f"environment = {scenario.environment}",
             f"tamper_rate = {scenario.tamper_rate}"]
    for i, step in enumerate(scenario.steps, start=1):
        lines += ["", f"[step.{i}]", f"kind = {step.kind}"]
        if step.script is not None:
            lines.append("script = " + " ".join(str(a) for a in step.script))
        lines += [f"expect_node = {step.expect_node}", f"expect_server = {step.expect_server}",
                  f"actor = {step.actor}", f"server = {step.server}"]
        if step.server_distances is not None:
            lines.append("server_distances = " + ",".join(map(str, step.server_distances)))
        if step.tx_offset_db:
            lines.append(f"tx_offset_db = {step.tx_offset_db}")
        if step.early_data:
            lines.append(f"early_data = {step.early_data.decode()}")
    return "\n".join(lines) + "\n"
