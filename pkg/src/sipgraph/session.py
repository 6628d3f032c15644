"""Prover/verifier orchestration, transcripts and the adversary catalogue.

A session is a single-threaded interleave: the verifier code drives, and
every prover reply passes through `Session` so it is logged, metered and
hashed before the verifier looks at it.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .field import P, LdeSketch, inv, poly_eval
from .fingerprint import Fingerprint
from .gstream import CostMeter, GraphStream, SetupError, Universe
from .sumcheck import (DenseVector, FreqWindow, HonestSumcheck, Mode,
                       SumcheckReject, indicator_poly, padded_correction,
                       sum_over_nodes, verify_rounds)


class Reject(Exception):
    def __init__(self, reason: str, stage: str = ""):
        super().__init__(f"{stage}: {reason}" if stage else reason)
        self.reason = reason
        self.stage = stage


# ---- provers ----------------------------------------------------------------

class HonestProver:
    """Keeps the full input and answers every request truthfully."""

    strategy = "honest"

    def __init__(self):
        self.stream: Optional[GraphStream] = None
        self.vectors: dict = {}
        self._sc: dict = {}
        self.cache: dict = {}

    def observe(self, stream: GraphStream):
        self.stream = stream
        self.edges = stream.final_edges() if stream.updates else {}

    # certificates
    def respond(self, kind: str, compute: Callable) -> list:
        return list(compute(self))

    # vectors mirrored from the public update rules
    def open_vector(self, name: str, universe: Universe, grid):
        self.vectors[name] = DenseVector(grid)

    def apply(self, name: str, idx, delta: int):
        self.vectors[name].add(idx, delta)

    # sum-check
    def sc_begin(self, name: str, h, h_degree: int, expect: Optional[int]) -> int:
        run = HonestSumcheck(self.vectors[name], h, h_degree)
        self._sc[name] = run
        return run.total()

    def sc_poly(self, name: str, j: int) -> list:
        return self._sc[name].round_poly()

    def sc_challenge(self, name: str, j: int, r: int):
        self._sc[name].bind(r)


class Adversary(HonestProver):
    """Honest machinery plus one corruption from the catalogue.

    When a tampered certificate would make a later count come out wrong,
    the adversary claims whatever count the verifier wants and keeps every
    round sum consistent, pushing the lie down to the final evaluation.
    """

    def __init__(self, strategy: str):
        super().__init__()
        if strategy not in STRATEGIES:
            raise SetupError(f"unknown adversary strategy {strategy!r}")
        self.strategy = strategy
        self.plan = STRATEGIES[strategy]
        self._first_sc: Optional[str] = None
        self._lie: dict = {}

    def respond(self, kind: str, compute: Callable) -> list:
        tokens = list(compute(self))
        if self.plan.tamper is not None and kind in self.plan.kinds:
            tokens = list(self.plan.tamper(kind, tokens, self))
        return tokens

    def sc_begin(self, name, h, h_degree, expect):
        honest = super().sc_begin(name, h, h_degree, expect)
        if self._first_sc is None:
            self._first_sc = name
        target = None
        if self.plan.lie == "plus-one" and name == self._first_sc:
            target = (honest + 1) % P
        elif self.plan.lie == "expected" and expect is not None and expect != honest:
            target = expect % P
        if target is not None:
            self._lie[name] = target
            return target
        return honest

    def sc_poly(self, name, j):
        g = super().sc_poly(name, j)
        if name in self._lie:
            ell = self._sc[name].grid.ell
            shift = (self._lie[name] - sum_over_nodes(g, ell)) * inv(ell) % P
            g = list(g)
            g[0] = (g[0] + shift) % P
            self._lie[(name, "g")] = g
        if self.plan.lie == "perturb" and name == self._first_sc:
            if j == min(1, self._sc[name].grid.d - 1):
                g = list(g)
                g[1 % len(g)] = (g[1 % len(g)] + 1) % P
        return g

    def sc_challenge(self, name, j, r):
        if name in self._lie:
            self._lie[name] = poly_eval(self._lie[(name, "g")], r)
        super().sc_challenge(name, j, r)


@dataclass
class Strategy:
    name: str
    protocols: tuple
    description: str
    kinds: tuple = ()
    tamper: Optional[Callable] = None
    lie: Optional[str] = "expected"   # 'expected', 'plus-one', 'perturb' or None


STRATEGIES: dict = {}


def register_strategy(name: str, protocols, description: str, kinds=(), lie="expected"):
    def deco(fn):
        STRATEGIES[name] = Strategy(name, tuple(protocols), description, tuple(kinds), fn, lie)
        return fn
    return deco


STRATEGIES["identity"] = Strategy("identity", ("*",), "no corruption at all", lie=None)
STRATEGIES["wrong-claim"] = Strategy(
    "wrong-claim", ("*",), "claims the first sum-check total plus one, rounds kept consistent",
    lie="plus-one")
STRATEGIES["poly-perturb"] = Strategy(
    "poly-perturb", ("*",), "adds one to a single coefficient of the round-2 polynomial",
    lie="perturb")


# ---- vector checks ----------------------------------------------------------

@dataclass
class VectorCheck:
    name: str
    universe: Universe
    sketch: LdeSketch
    aligned: bool


@dataclass
class Verdict:
    accepted: bool
    value: object = None
    reason: str = ""
    stage: str = ""

    def as_dict(self):
        if self.accepted:
            return {"status": "accept", "value": self.value}
        return {"status": "reject", "reason": self.reason, "stage": self.stage}


class Session:
    """Verifier-side context: randomness, channel, meter, transcript."""

    def __init__(self, stream: GraphStream, prover: Optional[HonestProver] = None,
                 seed: int = 0, mode: Mode = Mode("log"), protocol: str = "",
                 options: Optional[dict] = None):
        self.stream = stream
        self.prover = prover if prover is not None else HonestProver()
        self.seed = seed
        self.mode = mode
        self.protocol = protocol
        self.options = dict(options or {})
        self.rng = np.random.default_rng(seed)
        self.meter = CostMeter()
        self.messages: list = []
        self.sumchecks: list = []
        self.vectors: dict = {}
        self.phase = ""
        self._digest = hashlib.sha256()
        self.info: dict = {}
        self.prover.observe(stream)

    # randomness
    def rand_field(self) -> int:
        return int(self.rng.integers(0, P, dtype=np.int64))

    # logging
    def _log(self, direction: str, kind: str, payload, words: int, round_index=None):
        self._digest.update(repr((direction, kind, payload)).encode())
        msg = {"dir": direction, "kind": kind, "words": words, "bits": words * 61,
               "phase": self.phase}
        if round_index is not None:
            msg["round"] = round_index
        self.messages.append(msg)
        if direction == "P2V":
            self.meter.p2v(words)
        else:
            self.meter.v2p(words)

    # state held by the verifier
    def hold(self, name: str, words: int):
        self.meter.hold(name, words)

    def release(self, name: str):
        self.meter.release(name)

    def fingerprint(self, name: str, max_index: int) -> Fingerprint:
        self.hold("fp:" + name, 2)
        return Fingerprint(self.rand_field(), max_index)

    # certificates
    def receive(self, kind: str, compute: Callable) -> list:
        tokens = self.prover.respond(kind, compute)
        out = []
        for t in tokens:
            t = tuple(int(x) for x in t) if isinstance(t, (tuple, list)) else (int(t),)
            self._log("P2V", "cert:" + kind, t, max(1, len(t)))
            out.append(t)
        return out

    # vectors
    def open_vector(self, name: str, universe: Universe) -> VectorCheck:
        grid = self.mode.grid(universe.u)
        r = [self.rand_field() for _ in range(grid.d)]
        sk = LdeSketch(grid, r)
        vc = VectorCheck(name, universe, sk, universe.aligned(grid))
        self.vectors[name] = vc
        self.hold("vec:" + name, sk.words())
        self.prover.open_vector(name, universe, grid)
        return vc

    def update(self, name: str, pattern, delta: int, where=None):
        vc = self.vectors[name]
        idx = vc.universe.enumerate(pattern, where)
        if vc.aligned and where is None:
            vc.sketch.update_wildcard(pattern, delta)
        else:
            vc.sketch.update_many(idx, delta)
        self.prover.apply(name, idx, delta)

    def update_index(self, name: str, idx, delta: int):
        vc = self.vectors[name]
        idx = np.atleast_1d(np.asarray(idx, dtype=np.int64))
        vc.sketch.update_many(idx, delta)
        self.prover.apply(name, idx, delta)

    def finv(self, name: str, targets: Iterable[int], window: FreqWindow,
             expect: Optional[int] = None) -> int:
        """Verified number of universe entries whose frequency is in targets."""
        vc = self.vectors[name]
        grid = vc.sketch.params
        targets = list(targets)
        h = indicator_poly(targets, window)
        corr = padded_correction(h, grid)
        want = None if expect is None else (expect + corr) % P
        old_phase, self.phase = self.phase, name
        claim = self.prover.sc_begin(name, h, window.degree, want) % P
        self._log("P2V", "claim", claim, 1)
        stats = {"name": name, "ell": grid.ell, "d": grid.d, "u": grid.u,
                 "h_degree": window.degree, "poly_words": 0, "challenge_words": 0,
                 "rounds": 0}

        def next_poly(j):
            g = self.prover.sc_poly(name, j)
            self._log("P2V", "poly", tuple(int(c) for c in g), len(g), j + 1)
            stats["poly_words"] += len(g)
            stats["rounds"] += 1
            self.meter.add_round()
            return g

        def send(j, r):
            self._log("V2P", "challenge", r, 1, j + 1)
            stats["challenge_words"] += 1
            self.prover.sc_challenge(name, j, r)

        try:
            verify_rounds(claim, h, window.degree, vc.sketch, next_poly, send,
                          hold=lambda w: self.hold("poly:" + name, w + 2))
        except SumcheckReject as exc:
            raise Reject(f"sum-check failed in round {exc.round_index}: {exc.reason}", name)
        finally:
            self.sumchecks.append(stats)
            self.release("poly:" + name)
            self.phase = old_phase
        self.release("vec:" + name)
        total = (claim - corr) % P
        if total > grid.u:
            raise Reject("verified count exceeds the universe size", name)
        return total

    # results
    def transcript(self, verdict: Verdict) -> dict:
        return {
            "protocol": self.protocol,
            "seed": self.seed,
            "mode": str(self.mode),
            "prover": self.prover.strategy,
            "verdict": verdict.as_dict(),
            "meter": self.meter.as_dict(),
            "sumchecks": self.sumchecks,
            "info": self.info,
            "messages": self.messages,
            "payload_sha256": self._digest.hexdigest(),
        }


# ---- running ----------------------------------------------------------------

@dataclass
class Transcript:
    data: dict
    verdict: Verdict

    @property
    def accepted(self) -> bool:
        return self.verdict.accepted

    @property
    def value(self):
        return self.verdict.value

    def to_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))

    def report(self) -> dict:
        m = self.data["meter"]
        return {
            "protocol": self.data["protocol"],
            "mode": self.data["mode"],
            "seed": self.data["seed"],
            "prover": self.data["prover"],
            "verdict": self.data["verdict"],
            "rounds": m["rounds"],
            "verifier_space_bits": m["verifier_space_bits"],
            "comm_bits_p2v": m["comm_bits_p2v"],
            "comm_bits_v2p": m["comm_bits_v2p"],
            "messages": len(self.data["messages"]),
            "info": self.data["info"],
        }


def make_prover(strategy: Optional[str]) -> HonestProver:
    if strategy in (None, "", "honest"):
        return HonestProver()
    return Adversary(strategy)


def run_session(protocol: str, stream: GraphStream, prover=None, seed: int = 0,
                mode=None, options: Optional[dict] = None) -> Transcript:
    from .protocols import PROTOCOLS, default_mode

    if protocol not in PROTOCOLS:
        raise SetupError(f"unknown protocol {protocol!r}")
    if isinstance(prover, str) or prover is None:
        prover = make_prover(prover)
    if mode is None:
        mode = default_mode(protocol)
    elif isinstance(mode, str):
        mode = Mode.parse(mode)
    stream.validate()
    sess = Session(stream, prover, seed, mode, protocol, options)
    try:
        value = PROTOCOLS[protocol](sess)
        verdict = Verdict(True, value)
    except Reject as exc:
        verdict = Verdict(False, None, exc.reason, exc.stage)
    return Transcript(sess.transcript(verdict), verdict)


def soundness_trial(protocol: str, stream: GraphStream, strategy: str, trials: int = 1000,
                    seed: int = 0, mode=None, options: Optional[dict] = None) -> float:
    """Fraction of sessions rejected, each with fresh verifier randomness."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    seeds = np.random.SeedSequence(seed).generate_state(trials, dtype=np.uint32)
    rejected = 0
    for s in seeds:
        t = run_session(protocol, stream, Adversary(strategy), int(s), mode, options)
        rejected += not t.accepted
    return rejected / trials


def audit_order(data: dict) -> bool:
    """Every challenge for round j follows the round-j polynomial of its phase."""
    seen: dict = {}
    for msg in data["messages"]:
        if msg["kind"] == "claim":
            seen[msg["phase"]] = 0
        elif msg["kind"] == "poly":
            seen[msg["phase"]] = msg["round"]
        elif msg["kind"] == "challenge":
            if seen.get(msg["phase"]) != msg["round"]:
                return False
    return True
