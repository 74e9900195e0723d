"""Command-line front end: ``sglab check|path|simulate <file> [flags]``.

Exit codes: 0 no failing verdict, 1 some check failed or a construction
broke, 2 unusable input.  All floating CSV output is printed with 17
significant digits; certificates serialize canonically so identical
inputs and seeds reproduce identical bytes (timing aside).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .certificate import Certificate
from .cone import ones, sup_norm
from .dynamics import StopRule, as_operator, iterate, stability_battery
from .kfun import KFun, linear, power_kfun
from .network import NetworkError, network_from_dict, network_from_json
from .paths import (
    PathConstructionError,
    combined_path,
    default_knots,
    minimal_path,
    orbit_path,
    regularize,
    reparametrize_min_id,
    restrict_path,
    validate,
)
from .smallgain import (
    SamplerConfig,
    cycle_gain_check,
    max_mbi_probe,
    nji_probe,
    spectral_condition,
    uniform_nji_probe,
)

_FMT = "%.17g"


class InputError(ValueError):
    pass


def _parse_kfun_flag(text: str) -> KFun:
    """Parse ``linear:K``, ``power:C:P`` or a raw JSON gain descriptor."""
    if text.startswith("{"):
        from .network import gain_from_descriptor

        f, _ = gain_from_descriptor(json.loads(text))
        return f
    parts = text.split(":")
    if parts[0] == "linear" and len(parts) == 2:
        return linear(float(parts[1]))
    if parts[0] == "power" and len(parts) == 3:
        return power_kfun(float(parts[1]), float(parts[2]))[0]
    raise InputError(f"cannot parse comparison function {text!r}")


def _parse_grid_flag(text: str) -> np.ndarray:
    """``geometric:kmin:kmax`` gives the grid 2**k, k in [kmin, kmax]."""
    parts = text.split(":")
    if parts[0] == "geometric" and len(parts) == 3:
        return default_knots(int(parts[1]), int(parts[2]))
    raise InputError(f"cannot parse grid {text!r}")


def _parse_start(text: str, n: int) -> np.ndarray:
    if text.startswith("ray:"):
        return float(text[4:]) * ones(n)
    vec = np.asarray(json.loads(text), dtype=float)
    if vec.shape != (n,):
        raise InputError(f"start vector needs {n} entries")
    return vec


def _write_csv(rows, header: list[str], out):
    out.write(",".join(header) + "\n")
    for row in rows:
        cells = [str(c) if isinstance(c, (int, str)) else _FMT % c for c in row]
        out.write(",".join(cells) + "\n")


def _load(path: str):
    try:
        return network_from_json(path)
    except FileNotFoundError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except NetworkError as exc:
        raise InputError(str(exc)) from exc


def _emit(cert: Certificate, out_path: str | None) -> None:
    text = cert.to_json()
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


# -- subcommands -------------------------------------------------------------


def cmd_check(args) -> int:
    net, notes, digest = _load(args.network)
    cert = Certificate("check", digest, args.seed, notes=list(notes))
    rho = _parse_kfun_flag(args.rho) if args.rho else None
    grid = _parse_grid_flag(args.grid) if args.grid else None
    sampler = SamplerConfig(seed=args.seed, budget=args.budget)

    def run_battery(network):
        verdicts = [nji_probe(network, rho, sampler).to_dict()]
        r_probe = 1.0
        verdicts.append(
            uniform_nji_probe(network, r=r_probe, eps=r_probe / 4, rho=rho, sampler=sampler).to_dict()
        )
        verdicts.append(max_mbi_probe(network, rho, grid).to_dict())
        if network.uniform_maf == "max":
            verdicts.append(cycle_gain_check(network, rho).to_dict())
        if network.all_gains_linear and network.uniform_maf in ("max", "sum") and (rho is None or rho.is_linear):
            verdicts.append(spectral_condition(network, rho=rho, seed=args.seed).to_dict())
        return verdicts

    cert.verdicts.extend(run_battery(net))
    report = stability_battery(net, rho, grid)
    cert.stability = report.to_dict()
    if not report.ugas_evidence and report.inconclusive_r:
        cert.notes.append("stability battery inconclusive on some rays (iteration cap)")
    if args.N:
        rows = []
        with open(args.network) as fh:
            data = json.load(fh)
        if "template" not in data:
            raise InputError("--N sweeps need a network file with a template")
        for n_trunc in args.N:
            data_n = dict(data)
            data_n["nodes"] = n_trunc
            net_n, _ = network_from_dict(data_n)
            rep = stability_battery(net_n, rho, grid, n_max=64)
            mbi = max_mbi_probe(net_n, rho, grid)
            rows.append(
                {
                    "N": n_trunc,
                    "ugas_evidence": rep.ugas_evidence,
                    "mbi_status": mbi.status,
                    "beta_1_16": float(rep.kl_table[np.searchsorted(rep.r_grid, 1.0), min(16, rep.n_max)]),
                }
            )
        cert.extras["truncation_sweep"] = rows
    _emit(cert, args.out)
    return 1 if cert.has_fail else 0


def cmd_path(args) -> int:
    net, notes, digest = _load(args.network)
    cert = Certificate("path", digest, args.seed, notes=list(notes))
    rho = _parse_kfun_flag(args.rho) if args.rho else None
    knots = _parse_grid_flag(args.knots) if args.knots else None
    stop = StopRule()
    try:
        if args.method == "minimal":
            path = minimal_path(net, rho, knots, stop)
        elif args.method == "combined":
            path = combined_path(net, rho, knots, stop=stop)
        else:
            if not args.start:
                raise InputError("--method orbit needs --start")
            path = orbit_path(net, _parse_start(args.start, net.n), stop, rho)
        if args.target_rho:
            path = regularize(path, net, _parse_kfun_flag(args.target_rho))
        if args.min_id:
            path = reparametrize_min_id(path)
    except PathConstructionError as exc:
        cert.verdicts.append(
            {
                "condition": f"path:{args.method}",
                "status": "fail",
                "counterexample": {"knot": exc.knot, "reason": str(exc)},
            }
        )
        _emit(cert, args.out)
        return 1
    report = validate(path, net)
    cert.paths.append({"method": args.method, "report": report.to_dict(), "n_knots": len(path.r_grid)})
    cert.verdicts.append(
        {
            "condition": f"path:{args.method}",
            "status": "evidence" if report.passed else "fail",
            "witness": {"n_knots": len(path.r_grid)},
            "counterexample": None if report.passed else report.to_dict(),
        }
    )
    if args.restrict:
        nodes = [int(v) for v in args.restrict.split(",")]
        sub_report = validate(restrict_path(path, nodes), _sub(net, nodes))
        cert.paths.append({"method": f"{args.method}|restricted", "report": sub_report.to_dict()})
    if args.path_out:
        with open(args.path_out + ".json", "w") as fh:
            fh.write(json.dumps(path.to_dict(), sort_keys=True) + "\n")
        with open(args.path_out + ".csv", "w") as fh:
            header = ["r"] + [f"x{i}" for i in range(path.n_nodes)]
            _write_csv(
                ([r] + list(p) for r, p in zip(path.r_grid, path.points)),
                header,
                fh,
            )
    _emit(cert, args.out)
    return 1 if cert.has_fail else 0


def _sub(net, nodes):
    from .network import subnetwork

    return subnetwork(net, nodes)


def cmd_simulate(args) -> int:
    net, _, _ = _load(args.network)
    op = as_operator(net)
    if args.variant == "rho":
        if not args.rho:
            raise InputError("--variant rho needs --rho")
        op = op.enlarge_left(_parse_kfun_flag(args.rho))
    elif args.variant == "hat":
        op = op.augmented()
    elif args.variant.startswith("proj:"):
        op = op.projected(_parse_start(args.variant[5:], net.n))
    elif args.variant != "base":
        raise InputError(f"unknown variant {args.variant!r}")
    s0 = _parse_start(args.start, net.n)
    stop = StopRule(max_iter=max(args.steps, 1))
    if args.steps == 0:
        states = [s0]
        reason = "none"
    else:
        traj = iterate(op, s0, stop)
        states = traj.states[: args.steps + 1]
        reason = traj.stop_reason.value
    rows = ([k] + list(s) + [sup_norm(s)] for k, s in enumerate(states))
    header = ["step"] + [f"x{i}" for i in range(net.n)] + ["norm"]
    if args.out:
        with open(args.out, "w") as fh:
            _write_csv(rows, header, fh)
    else:
        _write_csv(rows, header, sys.stdout)
    print(f"stop reason: {reason}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sglab", description="small-gain analysis for interconnected networks")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="run the small-gain condition battery")
    c.add_argument("network")
    c.add_argument("--rho", default=None, help="strictness margin, e.g. linear:0.1")
    c.add_argument("--budget", type=int, default=10_000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--grid", default=None, help="ray grid, e.g. geometric:-8:8")
    c.add_argument("--N", type=int, action="append", default=None, help="truncation sweep size (repeatable)")
    c.add_argument("--out", default=None, help="certificate output file (default stdout)")
    c.set_defaults(func=cmd_check)

    t = sub.add_parser("path", help="construct and validate a decay path")
    t.add_argument("network")
    t.add_argument("--method", choices=("minimal", "combined", "orbit"), default="minimal")
    t.add_argument("--rho", default=None)
    t.add_argument("--target-rho", dest="target_rho", default=None)
    t.add_argument("--knots", default=None, help="knot grid, e.g. geometric:-10:10")
    t.add_argument("--start", default=None, help="orbit seed: ray:R or JSON vector")
    t.add_argument("--min-id", dest="min_id", action="store_true", help="reparametrize to identity lower bound")
    t.add_argument("--restrict", default=None, help="also validate the restriction to these nodes (comma list)")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", default=None)
    t.add_argument("--path-out", dest="path_out", default=None, help="path file prefix (.json/.csv)")
    t.set_defaults(func=cmd_path)

    s = sub.add_parser("simulate", help="run a trajectory and dump it as CSV")
    s.add_argument("network")
    s.add_argument("--start", required=True, help="ray:R or JSON vector")
    s.add_argument("--steps", type=int, default=50)
    s.add_argument("--variant", default="base", help="base | rho | hat | proj:<ray:R|vector>")
    s.add_argument("--rho", default=None)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, NetworkError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
