"""Batch experiment runner.

Every experiment is driven by a single seed; per-trial seeds are derived
by counter, so re-running a spec reproduces the report body byte for byte
and the worker count never changes results.  Reports are JSON lines
(default) or CSV; the first record echoes the full experiment spec.

Exit codes: 0 success, 2 invalid parameters, 3 capacity exceeded,
4 statistical infeasibility.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from . import gauss
from .bounds import (
    CorruptionCertificate,
    build_ghd_matrix,
    check_joker_inequality,
    corruption_lower_bound,
    discrepancy_scan,
    canonical_certificate,
)
from .core import (
    CubePairLaw,
    CubeSet,
    GhdParams,
    binomial_tail_b,
)
from .cubexform import cube_inequality_margin, disjoint_support_pair
from .errors import (
    CapacityError,
    CertificateInfeasibleError,
    StatisticalInfeasibilityError,
    TailBoundInfeasibleError,
)
from .protocols import (
    ExplicitPairs,
    PromiseWorstCase,
    UnderXi,
    compose_chain,
    estimate_error,
    protocol_from_descriptor,
    run_protocol,
    trivial_protocol,
    worked_composition,
)
from .rng import make_rng
from .streams import f0_epsilon_for, kmv_f0, streaming_to_protocol


def parse_number(text: str):
    """Exact fractions as 'a/b', otherwise a float (or int)."""
    if "/" in text:
        return Fraction(text)
    value = float(text)
    return int(value) if value.is_integer() and "." not in text and "e" not in text else value


class Reporter:
    """Collects rows and writes JSON lines or CSV.

    Every row must carry an exact flag or at least one ci95 field; the
    header record echoes the experiment spec verbatim.
    """

    def __init__(self, output: str, fmt: str):
        self.output = output
        self.fmt = fmt
        self.rows: list[dict] = []

    def header(self, command: str, parameters: dict, seed: int, trials) -> None:
        self.rows.append(
            {
                "record": "header",
                "command": command,
                "parameters": parameters,
                "seed": seed,
                "trials": trials,
                "format": self.fmt,
            }
        )

    def row(self, data: dict) -> None:
        has_exact = data.get("exact") is True
        has_ci = any("ci95" in key for key in data)
        if not (has_exact or has_ci):
            raise AssertionError("report row lacks both an exact flag and a ci95 field")
        self.rows.append(data)

    def _render(self) -> str:
        if self.fmt == "jsonl":
            return "\n".join(json.dumps(row, default=_json_default) for row in self.rows) + "\n"
        keys: list[str] = []
        for row in self.rows:
            for key in row:
                if key not in keys:
                    keys.append(key)
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=keys)
        writer.writeheader()
        for row in self.rows:
            writer.writerow(
                {
                    k: json.dumps(v, default=_json_default)
                    if isinstance(v, (dict, list, tuple))
                    else v
                    for k, v in row.items()
                }
            )
        return buffer.getvalue()

    def finish(self) -> None:
        text = self._render()
        if self.output == "-":
            sys.stdout.write(text)
        else:
            with open(self.output, "w") as fh:
                fh.write(text)


def _json_default(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value)}")


def resolve_workers(args) -> int:
    if getattr(args, "workers", None):
        return max(1, args.workers)
    env = os.environ.get("GHDLAB_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _parallel(fn, payloads, workers: int):
    if workers <= 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=min(workers, len(payloads))) as pool:
        return list(pool.map(fn, payloads))


def _spec_parameters(args, skip=("func", "output", "format", "workers")) -> dict:
    return {
        k: (str(v) if isinstance(v, Fraction) else v)
        for k, v in sorted(vars(args).items())
        if k not in skip and not callable(v)
    }


# ---------------------------------------------------------------------------
# rho derivation shared by cube-inequality and joker-scan


def derive_rho(n: int, eps: float = 1 / 8) -> dict:
    """Correlation parameter 4 b / sqrt(n), clamped into [0, 0.99].

    b comes from the exact tail-bound search when feasible at this n;
    otherwise the Chebyshev threshold sqrt(2) + 1/(2 sqrt(eps)) stands in
    and the derivation notes it.
    """
    try:
        b = binomial_tail_b(eps, n)
        source = "exact-cdf-search"
    except TailBoundInfeasibleError:
        b = math.sqrt(2.0) + 1.0 / (2.0 * math.sqrt(eps))
        source = "chebyshev-threshold (tail search infeasible at this n)"
    raw = 4.0 * b / math.sqrt(n)
    rho = min(raw, 0.99)
    return {"b": b, "source": source, "raw_rho": raw, "rho": rho, "clamped": rho != raw}


# ---------------------------------------------------------------------------
# gauss predicate spec parsing


def parse_predicate(text: str, n: int) -> gauss.GaussSetPredicate:
    """Predicate specs: 'kind:param[:param]' or JSON '{"kind": ..., "params": ...}'."""
    if text.lstrip().startswith("{"):
        desc = json.loads(text)
        return gauss.GaussSetPredicate(desc["kind"], desc.get("params", {}))
    parts = text.split(":")
    kind, params = parts[0], [float(p) for p in parts[1:]]
    if kind == "slab":
        return gauss.slab(params[0])
    if kind == "halfspace":
        return gauss.halfspace(params[0])
    if kind == "neg-halfspace":
        return gauss.halfspace(params[0], a=[-1.0] + [0.0] * (n - 1))
    if kind == "coord":
        return gauss.coord_threshold(params[0])
    if kind == "shell":
        return gauss.shell(params[0], params[1], n)
    raise ValueError(f"unknown predicate spec {text!r}")


# ---------------------------------------------------------------------------
# workers (module level for pickling)


def _correlation_worker(payload):
    a, b, n, eta, seed, chunks = payload
    return gauss.correlation_accumulate(a, b, n, eta, seed, chunks)


def _build_error_spec(protocol, spec_kind: str, spec_arg, seed: int):
    if spec_kind == "worst":
        return PromiseWorstCase()
    if spec_kind == "xi":
        return UnderXi(CubePairLaw(protocol.n, float(spec_arg)))
    if spec_kind == "gip-boundary":
        eps = float(spec_arg)
        rng = make_rng(seed, 999)
        pairs = []
        for _ in range(256):
            u = rng.standard_normal(protocol.n)
            u /= np.linalg.norm(u)
            w = rng.standard_normal(protocol.n)
            w -= np.dot(w, u) * u
            w /= np.linalg.norm(w)
            sign = 1.0 if rng.random() < 0.5 else -1.0
            pairs.append((u, sign * eps * u + math.sqrt(1 - eps * eps) * w))
        return ExplicitPairs(pairs)
    raise ValueError(f"unknown error spec {spec_kind!r}")


def _protocol_error_worker(payload):
    descriptor, spec_kind, spec_arg, trials, seed, offset = payload
    protocol = protocol_from_descriptor(descriptor)
    spec = _build_error_spec(protocol, spec_kind, spec_arg, seed)
    est = estimate_error(protocol, spec, trials, seed, trial_offset=offset)
    per_distance = est.details.get("per_distance", {})
    return {
        "trials": trials,
        "value": est.value,
        "per_distance": {str(d): v for d, v in per_distance.items()},
    }


def _merge_error_chunks(chunks: list[dict], mode_worst: bool):
    total = sum(c["trials"] for c in chunks)
    if mode_worst:
        distances = chunks[0]["per_distance"].keys()
        per_d = {}
        for d in distances:
            errors = sum(round(c["per_distance"][d] * c["trials"]) for c in chunks)
            per_d[d] = errors / total
        value = max(per_d.values()) if per_d else 0.0
        return value, per_d, total
    errors = sum(round(c["value"] * c["trials"]) for c in chunks)
    return errors / total, {}, total


def _run_protocol_error(descriptor, spec_kind, spec_arg, trials, seed, workers):
    chunk = max(100, math.ceil(trials / max(workers, 1) / 4))
    payloads = []
    offset = 0
    while offset < trials:
        size = min(chunk, trials - offset)
        payloads.append((descriptor, spec_kind, spec_arg, size, seed, offset))
        offset += size
    chunks = _parallel(_protocol_error_worker, payloads, workers)
    value, per_d, total = _merge_error_chunks(chunks, spec_kind == "worst")
    ci = 1.96 * math.sqrt(max(value * (1 - value), 0.0) / total)
    return value, ci, per_d, total


# ---------------------------------------------------------------------------
# commands


def cmd_cube_inequality(args) -> int:
    reporter = Reporter(args.output, args.format)
    reporter.header("cube-inequality", _spec_parameters(args), args.seed, None)
    if args.rho == "auto":
        derivation = derive_rho(args.n)
        rho = derivation["rho"]
        reporter.row({"record": "rho-derivation", **derivation, "exact": True})
    else:
        rho = float(parse_number(args.rho))
    if args.sets == "random":
        rng = make_rng(args.seed)
        a = CubeSet.random(args.n, args.density, rng)
        b = CubeSet.random(args.n, args.density, rng)
    elif args.sets == "halfweight":
        a, b = disjoint_support_pair(args.n)
    elif args.sets == "files":
        a = CubeSet.load_text(args.rows)
        b = CubeSet.load_text(args.cols)
    else:
        raise ValueError(f"unknown set family {args.sets!r}")
    report = cube_inequality_margin(a, b, rho, args.eps, method=args.method)
    reporter.row({"record": "cube-inequality", **report.to_dict()})
    reporter.finish()
    return 0


def cmd_gauss_correlation(args) -> int:
    reporter = Reporter(args.output, args.format)
    reporter.header("gauss-correlation", _spec_parameters(args), args.seed, args.trials)
    eta = 1.0 / math.sqrt(args.n) if args.eta == "auto" else float(parse_number(args.eta))
    a = parse_predicate(args.a, args.n)
    b = parse_predicate(args.b, args.n)
    workers = resolve_workers(args)
    chunks = gauss.correlation_chunks(args.trials)
    shards = [chunks[i::workers] for i in range(workers)]
    payloads = [(a, b, args.n, eta, args.seed, shard) for shard in shards if shard]
    results = _parallel(_correlation_worker, payloads, workers)
    sums = np.sum([r[0] for r in results], axis=0)
    second = np.sum([r[1] for r in results], axis=0)
    report = gauss.mc_correlation_bound(
        a, b, args.n, eta, args.trials, args.seed, moments=(sums, second)
    )
    reporter.row({"record": "gauss-correlation", **report})
    reporter.finish()
    return 0


def cmd_cosh_check(args) -> int:
    reporter = Reporter(args.output, args.format)
    reporter.header("cosh-check", _spec_parameters(args), args.seed, None)
    if args.grid:
        alphas = np.linspace(0.05, 4.0, args.grid)
        zs = np.linspace(-10.0, 10.0, args.grid)
        points = [(float(al), float(z)) for al in alphas for z in zs]
    else:
        points = [(args.alpha, args.z)]
    worst = 0.0
    for alpha, z in points:
        out = gauss.cosh_expectation_check(alpha, z)
        gap = abs(out["quadrature"] - out["closed_form"]) / out["closed_form"]
        worst = max(worst, gap)
        if not args.grid:
            reporter.row(
                {"record": "cosh-check", "alpha": alpha, "z": z, **out,
                 "relative_gap": gap, "exact": True}
            )
    if args.grid:
        reporter.row(
            {"record": "cosh-grid", "points": len(points),
             "worst_relative_gap": worst, "exact": True}
        )
    reporter.finish()
    return 0


def cmd_projection(args) -> int:
    reporter = Reporter(args.output, args.format)
    reporter.header("projection", _spec_parameters(args), args.seed, args.samples)
    predicate = parse_predicate(args.set, args.n)
    directions = _parse_directions(args.directions, args.n, args.seed)
    reports = gauss.projection_experiment(
        predicate, args.n, directions, args.samples, args.seed, method=args.method
    )
    # batch-means ci over quarters of the sample
    rng = make_rng(args.seed)
    points = predicate.conditional_sample(args.n, args.samples, rng)
    for index, report in enumerate(reports):
        quarters = np.array_split(points @ report.direction, 4)
        if all(len(q) >= 10**4 for q in quarters):
            values = [gauss.kl_to_gaussian(q, method=args.method).value for q in quarters]
            ci95 = 1.96 * float(np.std(values, ddof=1)) / 2.0
        else:
            ci95 = float("nan")
        est = report.kl_estimate
        reporter.row(
            {
                "record": "projection",
                "direction_index": index,
                "alpha": report.alpha,
                "kl": est.value,
                "kl_ci95": ci95,
                "method": est.method,
                "alternative_estimate": est.alternative,
                "tv_empirical": est.tv_empirical,
                "pinsker_ok": est.pinsker_ok,
                "methods_disagree": est.methods_disagree,
                "note": report.decomposition_note,
            }
        )
    reporter.row(
        {
            "record": "summary",
            "fraction_kl_below_eps": gauss.fraction_close_to_gaussian(reports, args.eps),
            "eps": args.eps,
            "exact": True,
        }
    )
    reporter.finish()
    return 0


def _parse_directions(text: str, n: int, seed: int):
    rng = make_rng(seed, 7)
    if text.startswith("random:"):
        count = int(text.split(":")[1])
        vectors = rng.standard_normal((count, n))
        return list(vectors / np.linalg.norm(vectors, axis=1, keepdims=True))
    if text.startswith("orthonormal:"):
        count = int(text.split(":")[1])
        matrix = rng.standard_normal((n, n))
        q, _ = np.linalg.qr(matrix)
        return [q[:, i] for i in range(count)]
    directions = []
    for token in text.split(","):
        if not token.startswith("e"):
            raise ValueError(f"unknown direction token {token!r}")
        axis = int(token[1:]) - 1
        vec = np.zeros(n)
        vec[axis] = 1.0
        directions.append(vec)
    return directions


def cmd_protocol_error(args) -> int:
    reporter = Reporter(args.output, args.format)
    reporter.header("protocol-error", _spec_parameters(args), args.seed, args.trials)
    descriptor = _protocol_descriptor_from_args(args)
    spec_kind, spec_arg = _parse_error_spec(args.spec)
    protocol = protocol_from_descriptor(descriptor)
    if args.exact:
        spec = _build_error_spec(protocol, spec_kind, spec_arg, args.seed)
        est = estimate_error(protocol, spec, 1, args.seed, exact=True)
        reporter.row(
            {
                "record": "protocol-error",
                "protocol": descriptor,
                "mode": est.mode,
                "value": est.value,
                "per_distance": {
                    str(d): v for d, v in est.details.get("per_distance", {}).items()
                },
                "cost_bits": protocol.declared_cost,
                "exact": True,
            }
        )
    else:
        value, ci, per_d, total = _run_protocol_error(
            descriptor, spec_kind, spec_arg, args.trials, args.seed, resolve_workers(args)
        )
        reporter.row(
            {
                "record": "protocol-error",
                "protocol": descriptor,
                "mode": spec_kind,
                "value": value,
                "ci95": ci,
                "per_distance": per_d,
                "trials": total,
                "cost_bits": protocol.declared_cost,
            }
        )
    reporter.finish()
    return 0


def _protocol_descriptor_from_args(args) -> dict:
    if args.protocol == "trivial":
        return {"name": "trivial", "params": {"n": args.n, "t": args.t, "g": args.g}}
    if args.protocol == "sampling":
        if not args.k:
            raise ValueError("sampling protocol needs --k")
        return {
            "name": "sampling",
            "params": {"n": args.n, "t": args.t, "g": args.g, "k": args.k},
        }
    if args.protocol == "gip":
        if not args.k:
            raise ValueError("hyperplane protocol needs --k")
        return {
            "name": "hyperplane_gip",
            "params": {"d": args.n, "k": args.k, "eps": args.gip_eps},
        }
    if args.protocol == "stream":
        params = GhdParams(args.n, args.t, args.g)
        k = args.k or math.ceil(6.0 / f0_epsilon_for(params) ** 2)
        return {
            "name": "stream_f0",
            "params": {"n": args.n, "t": args.t, "g": args.g, "k": k,
                       "passes": args.passes},
        }
    raise ValueError(f"unknown protocol {args.protocol!r}")


def _parse_error_spec(text: str):
    if text == "worst":
        return "worst", None
    if text.startswith("xi:"):
        return "xi", parse_number(text[3:])
    if text.startswith("gip-boundary:"):
        return "gip-boundary", float(text.split(":")[1])
    raise ValueError(f"unknown error spec {text!r}")


def cmd_reduction_chain(args) -> int:
    reporter = Reporter(args.output, args.format)
    reporter.header("reduction-chain", _spec_parameters(args), args.seed, args.trials)
    params = GhdParams(args.n, args.t, args.g)
    plan = worked_composition(params)
    inner_params = plan["inner"]
    reporter.row(
        {
            "record": "plan",
            "chain": [[kind, arg] for kind, arg in plan["chain"]],
            "inner": {"n": inner_params.n, "t": inner_params.t, "g": inner_params.g},
            "exact": True,
        }
    )
    protocol = compose_chain(plan["chain"], trivial_protocol(inner_params))
    rng = make_rng(args.seed)
    errors = promise_trials = 0
    cost_violations = 0
    from .core import BitString, hamming_distance

    for i in range(args.trials):
        x, y = BitString.random(args.n, rng), BitString.random(args.n, rng)
        label = params.label_of_distance(hamming_distance(x, y))
        out, transcript = run_protocol(protocol, x, y, seed=int(rng.integers(2**63)))
        if transcript.total_bits != inner_params.n:
            cost_violations += 1
        if label == "star":
            continue
        promise_trials += 1
        if out != label:
            errors += 1
    value = errors / max(promise_trials, 1)
    reporter.row(
        {
            "record": "composition-run",
            "promise_trials": promise_trials,
            "error": value,
            "ci95": 1.96 * math.sqrt(max(value * (1 - value), 0.0) / max(promise_trials, 1)),
            "cost_bits": protocol.declared_cost,
            "cost_violations": cost_violations,
        }
    )
    reporter.finish()
    return 0


def cmd_joker_scan(args) -> int:
    reporter = Reporter(args.output, args.format)
    reporter.header("joker-scan", _spec_parameters(args), args.seed, args.samples)
    if args.rho == "auto":
        derivation = derive_rho(args.n)
        rho = derivation["rho"]
        reporter.row({"record": "rho-derivation", **derivation, "exact": True})
    else:
        rho = float(parse_number(args.rho))
    cert = canonical_certificate(args.n, rho, delta=args.delta)
    if args.m is not None:
        cert.m = float(parse_number(args.m))
    report = check_joker_inequality(
        cert,
        args.mode,
        args.n,
        seed=args.seed,
        samples=args.samples,
        starts=args.starts,
        min_xi0=args.min_xi0,
    )
    reporter.row({"record": "joker-scan", "rho": rho, **report.to_dict()})
    if args.witness:
        from .bounds import Rectangle, SubcubeRectangle

        witness = report.worst_rectangle
        if isinstance(witness, SubcubeRectangle):
            witness = witness.materialize()
        if isinstance(witness, Rectangle):
            witness.rows.save_text(args.witness + ".rows")
            witness.cols.save_text(args.witness + ".cols")
    reporter.finish()
    return 0


def cmd_corruption_bound(args) -> int:
    reporter = Reporter(args.output, args.format)
    reporter.header("corruption-bound", _spec_parameters(args), args.seed, None)
    n = args.n or 64
    rho = 0.5
    cert = CorruptionCertificate(
        mu0=CubePairLaw(n, rho),
        mu1=CubePairLaw(n, 0.0),
        muplus=CubePairLaw(n, -rho),
        alpha0=parse_number(args.alpha0),
        alpha1=parse_number(args.alpha1),
        alphaplus=parse_number(args.alphaplus),
        eps=parse_number(args.eps),
        m=float(parse_number(args.m)),
    )
    derived = corruption_lower_bound(cert)
    reporter.row(
        {
            "record": "corruption-bound",
            "eps_prime": float(derived.eps_prime),
            "beta": derived.beta,
            "bound": derived.bound,
            "m": cert.m,
            "exact": True,
        }
    )
    reporter.finish()
    return 0


def cmd_discrepancy(args) -> int:
    reporter = Reporter(args.output, args.format)
    reporter.header("discrepancy", _spec_parameters(args), args.seed, args.samples)
    matrix = build_ghd_matrix(GhdParams(args.n, args.t, args.g))
    if not args.mu.startswith("xi:"):
        raise ValueError("distribution spec must be xi:<p>")
    mu = CubePairLaw(args.n, float(parse_number(args.mu[3:])))
    value = discrepancy_scan(mu, matrix, args.mode, seed=args.seed, samples=args.samples)
    reporter.row(
        {
            "record": "discrepancy",
            "max_discrepancy": value,
            "scope": "global" if args.mode == "exhaustive" else f"{args.samples} sampled",
            "exact": True,
        }
    )
    reporter.finish()
    return 0


def cmd_stream_reduce(args) -> int:
    reporter = Reporter(args.output, args.format)
    reporter.header("stream-reduce", _spec_parameters(args), args.seed, args.trials)
    t = args.t if args.t is not None else args.n / 2
    g = args.g if args.g is not None else math.sqrt(args.n)
    params = GhdParams(args.n, t, g)
    eps = f0_epsilon_for(params) if args.eps == "auto" else float(parse_number(args.eps))
    k = math.ceil(6.0 / eps**2)
    protocol, accounting = streaming_to_protocol(kmv_f0(k), args.passes, params)
    reporter.row(
        {
            "record": "accounting",
            "passes": accounting.passes,
            "state_bits": accounting.state_bits,
            "messages": accounting.messages,
            "total_bits": accounting.total_bits,
            "k": k,
            "eps_f0": eps,
            "exact": True,
        }
    )
    descriptor = protocol.to_descriptor()
    value, ci, per_d, total = _run_protocol_error(
        descriptor, "worst", None, args.trials, args.seed, resolve_workers(args)
    )
    reporter.row(
        {
            "record": "protocol-error",
            "value": value,
            "ci95": ci,
            "per_distance": per_d,
            "trials": total,
        }
    )
    reporter.finish()
    return 0


def cmd_norm_concentration(args) -> int:
    reporter = Reporter(args.output, args.format)
    reporter.header("norm-concentration", _spec_parameters(args), args.seed, args.trials)
    out = gauss.gaussian_norm_concentration(args.n, args.trials, args.seed, args.beta)
    reporter.row({"record": "norm-concentration", **out})
    reporter.finish()
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(sub, trials_default=None):
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--output", default="-")
    sub.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    sub.add_argument("--workers", type=int, default=None)
    if trials_default is not None:
        sub.add_argument("--trials", type=int, default=trials_default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghdlab",
        description="Experiments on the gap-Hamming-distance workbench",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("cube-inequality", help="two-sided correlated-measure margin")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rho", default="auto")
    p.add_argument("--eps", type=float, default=1 / 3)
    p.add_argument("--sets", choices=["random", "halfweight", "files"], default="random")
    p.add_argument("--density", type=float, default=0.9)
    p.add_argument("--rows")
    p.add_argument("--cols")
    p.add_argument("--method", choices=["auto", "wht", "pairs"], default="auto")
    _add_common(p)
    p.set_defaults(func=cmd_cube_inequality)

    p = subs.add_parser("gauss-correlation", help="correlation ratio Monte Carlo")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eta", default="auto")
    p.add_argument("--a", default="slab:1.0")
    p.add_argument("--b", default="halfspace:0.5")
    _add_common(p, trials_default=10**5)
    p.set_defaults(func=cmd_gauss_correlation)

    p = subs.add_parser("cosh-check", help="quadrature vs closed form")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--z", type=float, default=0.0)
    p.add_argument("--grid", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_cosh_check)

    p = subs.add_parser("projection", help="projections of a conditioned Gaussian")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--set", default="coord:2.0")
    p.add_argument("--directions", default="e1,e2")
    p.add_argument("--samples", type=int, default=10**5)
    p.add_argument("--method", choices=["binned", "spacing"], default="binned")
    p.add_argument("--eps", type=float, default=0.05)
    _add_common(p)
    p.set_defaults(func=cmd_projection)

    p = subs.add_parser("protocol-error", help="protocol error estimation")
    p.add_argument("--protocol", choices=["trivial", "sampling", "gip", "stream"],
                   required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--g", type=float, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--gip-eps", type=float, default=0.25)
    p.add_argument("--passes", type=int, default=1)
    p.add_argument("--spec", default="worst")
    p.add_argument("--exact", action="store_true")
    _add_common(p, trials_default=2000)
    p.set_defaults(func=cmd_protocol_error)

    p = subs.add_parser("reduction-chain", help="worked composition to a centered instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--g", type=float, required=True)
    _add_common(p, trials_default=500)
    p.set_defaults(func=cmd_reduction_chain)

    p = subs.add_parser("joker-scan", help="rectangle slack search")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=["exhaustive", "random", "greedy"], default="random")
    p.add_argument("--rho", default="auto")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--m", default=None)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--starts", type=int, default=64)
    p.add_argument("--min-xi0", type=float, default=0.0)
    p.add_argument("--witness", default=None,
                   help="path prefix for the worst rectangle in cube-set text format")
    _add_common(p)
    p.set_defaults(func=cmd_joker_scan)

    p = subs.add_parser("corruption-bound", help="certificate arithmetic")
    p.add_argument("--alpha0", required=True)
    p.add_argument("--alpha1", required=True)
    p.add_argument("--alphaplus", required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--m", required=True)
    p.add_argument("--n", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_corruption_bound)

    p = subs.add_parser("discrepancy", help="rectangle discrepancy scan")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--mu", default="xi:0")
    p.add_argument("--mode", choices=["exhaustive", "random"], default="exhaustive")
    p.add_argument("--samples", type=int, default=5000)
    _add_common(p)
    p.set_defaults(func=cmd_discrepancy)

    p = subs.add_parser("stream-reduce", help="distinct-elements reduction experiment")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--g", type=float, default=None)
    p.add_argument("--passes", type=int, default=1)
    p.add_argument("--eps", default="auto")
    _add_common(p, trials_default=200)
    p.set_defaults(func=cmd_stream_reduce)

    p = subs.add_parser("norm-concentration", help="Gaussian norm concentration")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float, default=0.1)
    _add_common(p, trials_default=10**5)
    p.set_defaults(func=cmd_norm_concentration)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "t", None) is None and hasattr(args, "t") and hasattr(args, "n"):
        args.t = args.n / 2
    if getattr(args, "g", None) is None and hasattr(args, "g") and hasattr(args, "n"):
        args.g = math.sqrt(args.n)
    try:
        return args.func(args)
    except (ValueError, CertificateInfeasibleError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except StatisticalInfeasibilityError as exc:
        print(f"statistical infeasibility: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
