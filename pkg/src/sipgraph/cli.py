"""Command-line harness: generate streams, run sessions, sweep costs, ask oracles.

Exit codes for `run`: 0 accept, 1 reject, 2 setup or usage error.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import sys
from typing import Optional

import numpy as np

from .field import DomainError
from .gstream import GraphStream, SetupError, format_stream, graph_from_edges, parse_stream
from .session import STRATEGIES, run_session
from .sumcheck import round_length

FIXTURES = {
    # hand-built laminar certificate: one odd set {0,1,2} with z = 1
    "triangle-claw": ("N 3\nE 0 1 1 1\nE 1 2 1 1\nE 0 2 1 1\nCLAW 1 1 1 0 1 2\n"),
    "two-triangles": ("N 6\nE 0 1 1\nE 1 2 1\nE 0 2 1\nE 3 4 1\nE 4 5 1\nE 3 5 1\n"),
    "k4": "N 4\n" + "".join(f"E {i} {j} 1\n" for i, j in itertools.combinations(range(4), 2)),
    "star": "N 4\nE 0 1 1\nE 0 2 1\nE 0 3 1\n",
}


# ---- generation -------------------------------------------------------------

def gen_random(n, p, seed, wmax=None) -> GraphStream:
    rng = np.random.default_rng(seed)
    edges = []
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < p:
            edges.append((i, j, int(rng.integers(1, wmax + 1))) if wmax else (i, j))
    return graph_from_edges(n, edges, wmax)


def gen_bipartite(n, p, seed, wmax=None) -> GraphStream:
    rng = np.random.default_rng(seed)
    left = n // 2
    edges = []
    for i in range(left):
        for j in range(left, n):
            if rng.random() < p:
                edges.append((i, j, int(rng.integers(1, wmax + 1))) if wmax else (i, j))
    return graph_from_edges(n, edges, wmax)


def metric_points(n, seed):
    side = max(4, math.ceil(math.sqrt(n)))
    rng = np.random.default_rng(seed)
    cells = rng.choice(side * side, size=n, replace=False)
    return [(int(c) // side, int(c) % side) for c in cells]


def gen_metric(n, seed) -> GraphStream:
    """Complete graph on distinct grid points under Manhattan distance."""
    pts = metric_points(n, seed)
    w = [[abs(a[0] - b[0]) + abs(a[1] - b[1]) for b in pts] for a in pts]
    for a, b, c in itertools.permutations(range(n), 3):
        if w[a][c] > w[a][b] + w[b][c]:
            raise SetupError("generated weights violate the triangle inequality")
    wmax = max((w[i][j] for i, j in itertools.combinations(range(n), 2)), default=1)
    return graph_from_edges(n, [(i, j, w[i][j]) for i, j in itertools.combinations(range(n), 2)],
                            max(wmax, 1))


def cmd_gen(args) -> int:
    if args.kind == "fixture":
        if args.name not in FIXTURES:
            raise SetupError(f"unknown fixture {args.name!r}; choose from {sorted(FIXTURES)}")
        text = FIXTURES[args.name]
    else:
        if args.n < 0 or not 0 <= args.p <= 1:
            raise SetupError("need n >= 0 and 0 <= p <= 1")
        if args.kind == "random":
            g = gen_random(args.n, args.p, args.seed, args.wmax)
        elif args.kind == "bipartite":
            g = gen_bipartite(args.n, args.p, args.seed, args.wmax)
        else:
            g = gen_metric(args.n, args.seed)
        text = format_stream(g, f"{args.kind} n={args.n} seed={args.seed}")
    _write(args.out, text)
    return 0


# ---- running ----------------------------------------------------------------

def _options(args) -> dict:
    opts = {}
    if getattr(args, "epsilon", None) is not None:
        opts["epsilon"] = args.epsilon
    if getattr(args, "maximality", None):
        opts["maximality"] = args.maximality
    return opts


def cmd_run(args) -> int:
    stream = _read_stream(args.stream)
    t = run_session(args.protocol, stream, args.adversary, args.seed, args.mode, _options(args))
    report = t.report()
    if args.report:
        full = dict(report, transcript=t.data)
        _write(args.report, json.dumps(full, sort_keys=True, indent=1) + "\n")
    v = t.verdict
    if v.accepted:
        print(f"accept {v.value}")
    else:
        print(f"reject [{v.stage}] {v.reason}")
    m = t.data["meter"]
    print(f"rounds={m['rounds']} space_bits={m['verifier_space_bits']} "
          f"p2v_bits={m['comm_bits_p2v']} v2p_bits={m['comm_bits_v2p']}")
    return 0 if v.accepted else 1


def predicted_sumcheck_words(stats: list) -> int:
    return sum(s["d"] * round_length(s["h_degree"], s["ell"]) for s in stats)


SWEEP_FIELDS = ["protocol", "mode", "n", "trial", "seed", "verdict", "value", "oracle",
                "rounds", "sumcheck_words", "predicted_sumcheck_words", "cert_words",
                "comm_bits_p2v", "comm_bits_v2p", "verifier_space_bits"]


def sweep_stream(protocol, n, seed) -> GraphStream:
    if protocol == "disj":
        rng = np.random.default_rng(seed)
        x = [int(b) for b in rng.random(n) < 0.3]
        y = [int(b) for b in rng.random(n) < 0.3]
        return GraphStream(n=n, x=x, y=y)
    if protocol == "tsp":
        return gen_metric(n, seed)
    if protocol in ("mcm-bipartite", "mwm-bipartite"):
        return gen_bipartite(n, 0.5, seed, 6 if protocol == "mwm-bipartite" else None)
    weighted = protocol in ("mst", "mwm-general")
    g = gen_random(n, 0.5, seed, 6 if weighted else None)
    if protocol == "mst":
        # keep it connected with a path of heavy edges
        have = {(u.i, u.j) for u in g.updates}
        for v in range(n - 1):
            if (v, v + 1) not in have:
                g.add(v, v + 1, 6)
        g.wmax = 6
    return g


def oracle_value(problem: str, g: GraphStream):
    from . import oracles

    if problem == "triangles":
        return oracles.oracle_triangles(g)
    if problem == "disj":
        return oracles.oracle_disjoint(g.x, g.y)
    if problem == "cc":
        return oracles.oracle_cc(g)
    if problem == "bipartite":
        return oracles.oracle_bipartite(g)
    if problem in ("mcm", "mcm-general"):
        return oracles.oracle_mcm(g)[0]
    if problem == "mcm-bipartite":
        return oracles.oracle_bipartite_mcm(g)[0]
    if problem in ("mwm", "mwm-general", "mwm-bipartite"):
        return oracles.oracle_mwm(g)[0]
    if problem == "mst":
        return oracles.oracle_mst(g)
    if problem == "tutte-berge":
        return oracles.oracle_tutte_berge(g)[0]
    if problem == "tsp":
        n, e = g.n, g.final_edges()
        w = [[0 if i == j else e[(min(i, j), max(i, j))] for j in range(n)] for i in range(n)]
        return oracles.oracle_tsp(n, w)
    raise SetupError(f"no oracle for {problem!r}")


def cmd_sweep(args) -> int:
    lo, hi = _size_range(args.sizes)
    rows = []
    for n in range(lo, hi + 1):
        for trial in range(args.trials):
            seed = int(np.random.SeedSequence([args.seed, n, trial]).generate_state(1)[0])
            g = sweep_stream(args.protocol, n, seed)
            t = run_session(args.protocol, g, None, seed, args.mode, _options(args))
            stats = t.data["sumchecks"]
            msgs = t.data["messages"]
            rows.append({
                "protocol": args.protocol, "mode": t.data["mode"], "n": n, "trial": trial,
                "seed": seed, "verdict": t.data["verdict"]["status"], "value": t.value,
                "oracle": oracle_value(args.protocol, g) if args.oracle else "",
                "rounds": t.data["meter"]["rounds"],
                "sumcheck_words": sum(s["poly_words"] for s in stats),
                "predicted_sumcheck_words": predicted_sumcheck_words(stats),
                "cert_words": sum(m["words"] for m in msgs if m["kind"].startswith("cert:")),
                "comm_bits_p2v": t.data["meter"]["comm_bits_p2v"],
                "comm_bits_v2p": t.data["meter"]["comm_bits_v2p"],
                "verifier_space_bits": t.data["meter"]["verifier_space_bits"],
            })
    out = open(args.out, "w", newline="") if args.out and args.out != "-" else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=SWEEP_FIELDS)
        w.writeheader()
        w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_oracle(args) -> int:
    print(oracle_value(args.problem, _read_stream(args.stream)))
    return 0


def cmd_adversaries(args) -> int:
    for name, s in sorted(STRATEGIES.items()):
        print(f"{name:22s} {','.join(s.protocols):34s} {s.description}")
    return 0


# ---- plumbing ---------------------------------------------------------------

def _size_range(text: str):
    try:
        if ":" in text:
            lo, hi = (int(x) for x in text.split(":"))
        else:
            lo = hi = int(text)
    except ValueError:
        raise SetupError(f"bad size range {text!r}; use N or LO:HI") from None
    if lo < 0 or hi < lo:
        raise SetupError(f"bad size range {text!r}")
    return lo, hi


def _read_stream(path: str) -> GraphStream:
    try:
        text = sys.stdin.read() if path == "-" else open(path).read()
    except OSError as exc:
        raise SetupError(f"cannot read {path}: {exc.strerror}") from None
    return parse_stream(text)


def _write(path: Optional[str], text: str):
    if not path or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    from .protocols import PROTOCOLS

    ap = argparse.ArgumentParser(prog="sipgraph", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="write a graph stream file")
    g.add_argument("kind", choices=["random", "bipartite", "metric", "fixture"])
    g.add_argument("--n", type=int, default=8)
    g.add_argument("--p", type=float, default=0.5)
    g.add_argument("--wmax", type=int, default=None, help="draw weights in [1, wmax]")
    g.add_argument("--name", default="triangle-claw", help="fixture name")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="-")
    g.set_defaults(fn=cmd_gen)

    r = sub.add_parser("run", help="run one session")
    r.add_argument("protocol", choices=sorted(PROTOCOLS))
    r.add_argument("stream")
    r.add_argument("--mode", default=None, help="log or const:GAMMA")
    r.add_argument("--adversary", default=None, choices=sorted(STRATEGIES))
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--epsilon", type=float, default=None)
    r.add_argument("--maximality", choices=["A", "B"], default=None)
    r.add_argument("--report", default=None, help="write the JSON report here")
    r.set_defaults(fn=cmd_run)

    s = sub.add_parser("sweep", help="CSV of measured costs against predictions")
    s.add_argument("protocol", choices=sorted(PROTOCOLS))
    s.add_argument("--sizes", default="4:8")
    s.add_argument("--trials", type=int, default=3)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--mode", default=None)
    s.add_argument("--epsilon", type=float, default=None)
    s.add_argument("--maximality", choices=["A", "B"], default=None)
    s.add_argument("--oracle", action="store_true", help="add the reference answer column")
    s.add_argument("--out", default="-")
    s.set_defaults(fn=cmd_sweep)

    o = sub.add_parser("oracle", help="brute-force reference answer")
    o.add_argument("problem", choices=["triangles", "disj", "cc", "bipartite", "mcm", "mwm",
                                       "mst", "tutte-berge", "tsp"])
    o.add_argument("stream")
    o.set_defaults(fn=cmd_oracle)

    a = sub.add_parser("adversaries", help="list the adversary catalogue")
    a.set_defaults(fn=cmd_adversaries)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.fn(args)
    except (SetupError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
