"""Command-line front end.

Runs the standard experiments end to end and emits machine-readable tables:
exact cumulant polynomials, limit-law distance ladders, rate certificates,
local-limit and deviation tables, residue grids, and sampled spin rows.

Output is CSV on stdout by default (``--format json`` switches, ``--output``
writes to a file; the MODSPIN_OUTPUT_DIR environment variable prefixes
relative output paths).  Every emission starts with a provenance header
carrying the command, its parameters, the library version and the seed, so
identical invocations produce byte-identical files.

Exit codes: 0 success, 1 assertion/verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from . import __version__
from . import cumulant_engine as ce
from . import limits as lim
from . import modgauss as mg
from . import spin_models as sm
from .numerics import log_sum_exp

USAGE_ERROR = 2
CHECK_FAILED = 1


@dataclass
class RunConfig:
    """Parsed invocation: command, parameters, grids, and output routing."""

    command: str
    params: dict
    output: str | None = None
    fmt: str = "csv"
    seed: int = 0
    rows: list[list] = field(default_factory=list)
    columns: list[str] = field(default_factory=list)
    footer: dict = field(default_factory=dict)

    def provenance(self) -> dict:
        return {"command": self.command, "params": self.params,
                "version": __version__, "seed": self.seed}

    def emit(self) -> None:
        dest = self.output
        if dest is not None and not os.path.isabs(dest):
            dest = os.path.join(os.environ.get("MODSPIN_OUTPUT_DIR", ""),
                                dest)
        text = self._render()
        if dest is None:
            sys.stdout.write(text)
        else:
            with open(dest, "w", encoding="utf-8") as fh:
                fh.write(text)

    def _render(self) -> str:
        if self.fmt == "json":
            payload = {"provenance": self.provenance(),
                       "columns": self.columns,
                       "rows": self.rows}
            if self.footer:
                payload["footer"] = self.footer
            return json.dumps(payload, sort_keys=True) + "\n"
        lines = ["# " + json.dumps(self.provenance(), sort_keys=True)]
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(_cell(v) for v in row))
        for key in sorted(self.footer):
            lines.append(f"# {key} = {_cell(self.footer[key])}")
        return "\n".join(lines) + "\n"


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _ladder(text: str) -> list[int]:
    values = [int(float(tok)) for tok in text.split(",") if tok.strip()]
    if not values or any(b <= a for a, b in zip(values, values[1:])):
        raise argparse.ArgumentTypeError(
            "ladder must be a strictly increasing integer list")
    return values


def _interval(text: str) -> tuple[float, float]:
    parts = [float(tok) for tok in text.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("interval must be 'a,b'")
    return parts[0], parts[1]


def _pair(text: str) -> tuple[float, float]:
    parts = [float(tok) for tok in text.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("range must be 'lo,hi'")
    if parts[1] <= parts[0]:
        raise argparse.ArgumentTypeError("range must be increasing")
    return parts[0], parts[1]


# ---------------------------------------------------------------------------
# subcommands


def cmd_cumulants(args: argparse.Namespace, cfg: RunConfig) -> int:
    cfg.columns = ["quantity", "value"]
    if args.q is not None:
        cfg.rows.append([f"Q({args.q})", ce.q_value(args.q)])
        return 0
    if args.joint:
        idx = [int(tok) for tok in args.joint.split(",")]
        poly = ce.joint_cumulant_spins(idx)
        cfg.rows.append([f"kappa{tuple(idx)}", poly.to_text()])
        return 0
    if args.verify:
        if args.n is None or args.beta is None:
            raise SystemExit(USAGE_ERROR)
        x = math.tanh(args.beta)
        pmf = sm.ising_magnetization_pmf(0.0, args.beta, args.n)
        measured = ce.pmf_cumulants(pmf, 2 * args.orders_max)
        ok = True
        for r in range(1, args.orders_max + 1):
            exact = float(ce.magnetization_cumulant_exact(r, args.n)(x))
            got = measured[2 * r - 1]
            rel = abs(got - exact) / max(1.0, abs(exact))
            cfg.rows.append([f"kappa_{2*r}", got])
            cfg.rows.append([f"kappa_{2*r}_exact", exact])
            ok = ok and rel < 1e-8
        cfg.footer["verified"] = ok
        return 0 if ok else CHECK_FAILED
    if args.r is not None:
        poly = ce.polynomial_P(args.r)
        cfg.rows.append([f"P_{args.r}", poly.to_text()])
        cfg.rows.append([f"estimate_{args.r}",
                         f"({poly.to_text()}) / ((1 - x)^{2 * args.r - 1})"])
        cfg.rows.append([f"Q({args.r})", ce.q_value(args.r)])
        return 0
    raise SystemExit(USAGE_ERROR)


def _cw_dkol(n: int) -> float:
    return lim.measured_kolmogorov(n)


def _mixed_dkol(n: int, beta: float, gamma: float) -> float:
    law = sm.mixed_magnetization_pmf(beta, gamma, n)
    t_n = math.sqrt(n) * math.exp(2.0 * beta)
    values = law.axis_values() / n ** 0.25 / t_n
    desc = mg.descriptor(sm.ModelSpec(sm.ModelKind.ISING, n, 0.0, beta))
    i_inf = mg.residue_integral(desc, None)
    cdf = lambda pts: lim.density_cdf(pts, lambda x: desc.psi(x) / i_inf,
                                      lower=-12.0)
    return lim.kolmogorov(values, law.probs(), cdf)


def cmd_limit_law(args: argparse.Namespace, cfg: RunConfig) -> int:
    ladder = args.ladder or ([args.n] if args.n else None)
    if ladder is None:
        raise SystemExit(USAGE_ERROR)
    if args.model == "cw":
        cfg.columns = ["n", "d_kol"]
        for n in ladder:
            cfg.rows.append([n, _cw_dkol(n)])
    elif args.model == "mixed":
        gamma = args.gamma if args.gamma is not None \
            else math.exp(-2.0 * args.beta)
        cfg.columns = ["n", "d_kol"]
        for n in ladder:
            cfg.rows.append([n, _mixed_dkol(n, args.beta, gamma)])
        cfg.footer["gamma"] = gamma
    elif args.model == "walk":
        cfg.columns = ["n", "cell_tv"]
        for n in ladder:
            cfg.rows.append([n, mg.walk_cell_tv(args.dim, n)])
    else:
        raise SystemExit(USAGE_ERROR)
    deltas = [row[1] for row in cfg.rows]
    cfg.footer["monotone_decreasing"] = all(
        b < a for a, b in zip(deltas, deltas[1:]))
    return 0


def cmd_rate(args: argparse.Namespace, cfg: RunConfig) -> int:
    cfg.columns = ["n", "epsilon", "smoothing_term", "l1_term",
                   "total_bound", "measured_dkol"]
    ok = True
    for n in args.ladder:
        cert = lim.rate_certificate(n, args.b, args.D)
        cfg.rows.append([cert.n, cert.epsilon, cert.smoothing_term,
                         cert.l1_term, cert.total_bound, cert.measured_dkol])
        ok = ok and cert.measured_dkol <= cert.total_bound
    cfg.footer["measured_within_bound"] = ok
    return 0 if ok else CHECK_FAILED


def cmd_local_limit(args: argparse.Namespace, cfg: RunConfig) -> int:
    lhs, rhs = lim.local_limit_check(args.n, args.interval)
    cfg.columns = ["n", "a", "b", "lhs", "rhs"]
    cfg.rows.append([args.n, args.interval[0], args.interval[1], lhs, rhs])
    return 0


def _binomial_upper_tail(n: int, alpha: float, threshold: float) -> float:
    """P[M_n >= threshold] for n independent spins with field alpha."""
    p_up = math.exp(alpha) / (2.0 * math.cosh(alpha))
    k0 = max(0, math.ceil((n + threshold) / 2.0))
    if k0 > n:
        return 0.0
    k = np.arange(k0, n + 1)
    logpmf = (gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
              + k * math.log(p_up) + (n - k) * math.log1p(-p_up))
    return math.exp(log_sum_exp(logpmf))


def cmd_deviations(args: argparse.Namespace, cfg: RunConfig) -> int:
    desc = mg.descriptor(
        sm.ModelSpec(sm.ModelKind.CURIE_WEISS, args.ladder[0],
                     alpha=args.alpha))
    cfg.columns = ["n", "exact_tail", "predicted", "ratio"]
    for n in args.ladder:
        t_n = desc.t_n(n)
        threshold = n * math.tanh(args.alpha) + args.x * t_n * n ** (1.0 / 3.0)
        exact = _binomial_upper_tail(n, args.alpha, threshold)
        predicted, ratio = mg.precise_deviation(desc, n, args.x, exact)
        cfg.rows.append([n, exact, predicted, ratio])
    return 0


def cmd_residue(args: argparse.Namespace, cfg: RunConfig) -> int:
    if args.ladder is None and args.n is None:
        raise SystemExit(USAGE_ERROR)
    spec = sm.ModelSpec(
        kind=sm.ModelKind(args.model if args.model != "cw" else
                          "curie_weiss"),
        n=args.ladder[0] if args.ladder else args.n,
        alpha=args.alpha, beta=args.beta, dim=args.dim)
    desc = mg.descriptor(spec)
    if desc.dim != 1:
        raise SystemExit(USAGE_ERROR)
    if args.ladder:
        # convergence table: residue integrals and L1 gaps along n
        i_inf = mg.residue_integral(desc, None)
        cfg.columns = ["n", "residue_integral", "l1_distance",
                       "scaled_l1_ratio"]
        for n in args.ladder:
            i_n = mg.residue_integral(desc, n)
            l1 = mg.l1_mod_distance(desc, n)
            cfg.rows.append([n, i_n, l1, math.sqrt(n) * l1 / i_inf])
        cfg.footer["limit_integral"] = i_inf
        return 0
    if args.n is None:
        raise SystemExit(USAGE_ERROR)
    lo, hi = args.t_range
    ts = np.arange(lo, hi + args.t_step / 2.0, args.t_step)
    pn = desc.psi_n(args.n, ts)
    p = desc.psi(ts)
    cfg.columns = ["t", "psi_n", "psi", "abs_diff"]
    for t, a, b in zip(ts, pn, p):
        cfg.rows.append([float(t), float(a), float(b), float(abs(a - b))])
    cfg.footer["max_abs_diff"] = float(np.max(np.abs(pn - p)))
    return 0


def cmd_sample(args: argparse.Namespace, cfg: RunConfig) -> int:
    kind = {"cw": sm.ModelKind.CURIE_WEISS, "ising": sm.ModelKind.ISING,
            "mixed": sm.ModelKind.MIXED}.get(args.model)
    if kind is None:
        raise SystemExit(USAGE_ERROR)
    spec = sm.ModelSpec(kind=kind, n=args.n, alpha=args.alpha,
                        beta=args.beta, gamma=args.gamma)
    cfg.columns = [f"s{i+1}" for i in range(args.n)]
    for i in range(args.count):
        conf = sm.sample_configuration(spec, args.seed + i)
        cfg.rows.append([int(v) for v in conf.spins])
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_routing_options(parser: argparse.ArgumentParser,
                         inside_subcommand: bool) -> None:
    # accepted both before and after the subcommand; the suppressed
    # defaults keep a subcommand parse from clobbering top-level values
    d = argparse.SUPPRESS if inside_subcommand else None
    parser.add_argument("--output", default=d,
                        help="write to this path instead of stdout")
    parser.add_argument("--format", choices=("csv", "json"),
                        default=argparse.SUPPRESS if inside_subcommand
                        else "csv")
    parser.add_argument("--seed", type=int,
                        default=argparse.SUPPRESS if inside_subcommand
                        else 0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modspin",
        description="exact and numerical limit-law toolkit for 1d spin "
                    "chains")
    _add_routing_options(parser, inside_subcommand=False)
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("cumulants", help="exact cumulant polynomials and "
                       "verification")
    c.add_argument("--r", type=int)
    c.add_argument("--q", type=int)
    c.add_argument("--joint", help="comma list of spin positions")
    c.add_argument("--verify", action="store_true")
    c.add_argument("--n", type=int)
    c.add_argument("--beta", type=float)
    c.add_argument("--orders-max", type=int, default=2)
    c.set_defaults(func=cmd_cumulants)

    ll = sub.add_parser("limit-law", help="distance ladders to the tilted "
                        "limit laws")
    ll.add_argument("--model", choices=("cw", "mixed", "walk"),
                    required=True)
    ll.add_argument("--ladder", type=_ladder)
    ll.add_argument("--n", type=int)
    ll.add_argument("--beta", type=float, default=0.0)
    ll.add_argument("--gamma", type=float)
    ll.add_argument("--dim", type=int, default=2)
    ll.set_defaults(func=cmd_limit_law)

    r = sub.add_parser("rate", help="explicit distance certificates")
    r.add_argument("--ladder", type=_ladder, required=True)
    r.add_argument("--b", type=float, default=0.77)
    r.add_argument("--D", type=float, default=0.77)
    r.set_defaults(func=cmd_rate)

    loc = sub.add_parser("local-limit", help="interval local limit check")
    loc.add_argument("--n", type=int, required=True)
    loc.add_argument("--interval", type=_interval, required=True)
    loc.set_defaults(func=cmd_local_limit)

    dev = sub.add_parser("deviations", help="precise-deviation ratio table")
    dev.add_argument("--alpha", type=float, required=True)
    dev.add_argument("--x", type=float, required=True)
    dev.add_argument("--ladder", type=_ladder, required=True)
    dev.set_defaults(func=cmd_deviations)

    res = sub.add_parser("residue", help="psi_n / psi grids")
    res.add_argument("--model", choices=("cw", "ising", "walk"),
                     required=True)
    res.add_argument("--alpha", type=float, default=0.0)
    res.add_argument("--beta", type=float, default=0.0)
    res.add_argument("--n", type=int)
    res.add_argument("--ladder", type=_ladder)
    res.add_argument("--dim", type=int, default=1)
    res.add_argument("--t-range", type=_pair, default=(-3.0, 3.0))
    res.add_argument("--t-step", type=float, default=0.01)
    res.set_defaults(func=cmd_residue)

    s = sub.add_parser("sample", help="exact configuration samples")
    s.add_argument("--model", choices=("cw", "ising", "mixed"),
                   required=True)
    s.add_argument("--alpha", type=float, default=0.0)
    s.add_argument("--beta", type=float, default=0.0)
    s.add_argument("--gamma", type=float, default=0.0)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--count", type=int, default=1)
    s.set_defaults(func=cmd_sample)

    for command in sub.choices.values():
        _add_routing_options(command, inside_subcommand=True)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors already
        return int(exc.code or 0)
    params = {k: v for k, v in vars(args).items()
              if k not in ("func", "output", "format", "seed", "command")
              and v is not None}
    cfg = RunConfig(command=args.command, params=_jsonable(params),
                    output=args.output, fmt=args.format, seed=args.seed)
    try:
        code = args.func(args, cfg)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ValueError, mg.NonIntegrableError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return USAGE_ERROR
    cfg.emit()
    return code


def _jsonable(params: dict) -> dict:
    out = {}
    for k, v in params.items():
        if isinstance(v, tuple):
            out[k] = list(v)
        else:
            out[k] = v
    return out


if __name__ == "__main__":
    sys.exit(main())
