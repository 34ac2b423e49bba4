"""Command-line front end.

Subcommands cover lattice utilities, the moment/cumulant transforms, the
exact identity suites, and the Monte Carlo sweeps.  Reports are JSON
(default) or CSV; exit status is 0 when every record passes, 1 when a
check fails, and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import __version__
from .cumulants import (
    CumulantFunctional,
    MomentFunctional,
    cumulant_functional,
    cumulant_functional_from_json,
    functional_to_json,
    moment_functional,
    moment_functional_from_json,
)
from .errors import CrossingPartitionError, DimensionError, SizeGuardError
from .measures import (
    exact_moment,
    example_formulas_check,
    identity_suite,
    main_theorem_residual,
    st_uniform_formula,
)
from .matrixsim import (
    MatrixEnsembleConfig,
    calibrate,
    lem_proj_decay,
    main_theorem_matrix_residual,
)
from .partitions import (
    Partition,
    classify_classes,
    enumerate_noncrossing,
    enumerate_set_partitions,
    kreweras,
    mobius,
)
from .processes import Subdivision, make_tuple, spec_from_descriptor
from .rational import format_rational, parse_rational


def _parse_process(text: str):
    text = text.strip()
    if text.startswith("{"):
        return spec_from_descriptor(json.loads(text))
    return spec_from_descriptor(text)


def _write_report(args, command: str, records: list[dict], seed=None) -> None:
    if args.output == "csv":
        buf = io.StringIO()
        if records:
            writer = csv.DictWriter(buf, fieldnames=list(records[0].keys()))
            writer.writeheader()
            writer.writerows(records)
        text = buf.getvalue()
    else:
        report = {
            "tool_version": __version__,
            "command": command,
            "seed": seed,
            "records": records,
        }
        text = json.dumps(report, indent=2, default=str) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _passed(records: list[dict]) -> bool:
    return all(r.get("pass", True) for r in records)


# ---------------------------------------------------------------------------
# partitions


def _cmd_partitions_enumerate(args) -> int:
    enum = enumerate_noncrossing if args.noncrossing else enumerate_set_partitions
    records = [{"partition": str(p), "blocks": p.num_blocks, "pass": True}
               for p in enum(args.k)]
    _write_report(args, "partitions enumerate", records)
    return 0


def _cmd_partitions_mobius(args) -> int:
    lower = Partition.parse(args.lower)
    upper = Partition.parse(args.upper)
    value = mobius(lower, upper, args.lattice)
    _write_report(args, "partitions mobius", [{
        "lower": str(lower), "upper": str(upper), "lattice": args.lattice,
        "mobius": format_rational(value), "pass": True,
    }])
    return 0


def _cmd_partitions_kreweras(args) -> int:
    p = Partition.parse(args.partition)
    _write_report(args, "partitions kreweras", [{
        "partition": str(p), "kreweras": str(kreweras(p)), "pass": True,
    }])
    return 0


def _cmd_partitions_classify(args) -> int:
    p = Partition.parse(args.partition)
    split = classify_classes(p)
    _write_report(args, "partitions classify", [{
        "partition": str(p),
        "outer": "".join("(" + ",".join(map(str, b)) + ")" for b in split.outer),
        "inner": "".join("(" + ",".join(map(str, b)) + ")" for b in split.inner),
        "outer_count": split.outer_count,
        "inner_count": split.inner_count,
        "pass": True,
    }])
    return 0


# ---------------------------------------------------------------------------
# cumulants


def _single_variable_cumulants(spec, order: int) -> CumulantFunctional:
    if spec.k != 1:
        raise DimensionError("--process must describe a single-component process")
    from .processes import word_cumulant

    seq = [word_cumulant(spec.words[0] * n) for n in range(1, order + 1)]
    return CumulantFunctional.from_single_variable(order, seq)


def _cmd_cumulants_to_moments(args) -> int:
    if args.functional:
        with open(args.functional) as fh:
            r = cumulant_functional_from_json(json.load(fh))
    else:
        r = _single_variable_cumulants(_parse_process(args.process), args.order)
    m = moment_functional(r)
    records = [{
        "functional": json.dumps(functional_to_json(m)),
        "moments": ",".join(
            format_rational(m.values[tuple(range(1, n + 1))]) for n in range(1, m.k + 1)
        ),
        "pass": True,
    }]
    _write_report(args, "cumulants to-moments", records)
    return 0


def _cmd_cumulants_from_moments(args) -> int:
    if args.functional:
        with open(args.functional) as fh:
            m = moment_functional_from_json(json.load(fh))
    else:
        seq = [parse_rational(x) for x in args.moments.split(",")]
        m = MomentFunctional.from_single_variable(len(seq), seq)
    r = cumulant_functional(m)
    records = [{
        "functional": json.dumps(functional_to_json(r)),
        "cumulants": ",".join(
            format_rational(r.values[tuple(range(1, n + 1))]) for n in range(1, r.k + 1)
        ),
        "pass": True,
    }]
    _write_report(args, "cumulants from-moments", records)
    return 0


# ---------------------------------------------------------------------------
# verify (exact engine)


def _cmd_verify_suite(args) -> int:
    base = _parse_process(args.process)
    records = identity_suite(base, args.k_max, process_name=args.process)
    _write_report(args, "verify suite", records)
    return 0 if _passed(records) else 1


def _cmd_verify_main_theorem(args) -> int:
    base = _parse_process(args.process)
    t = parse_rational(args.t)
    orders = ["L1", "L2"] if args.order == "both" else [args.order]
    records = []
    for k in range(1, args.k_max + 1):
        spec = make_tuple(base, "identical", k=k)
        for p in enumerate_noncrossing(k):
            for order in orders:
                if order == "L2" and 2 * k > 8:
                    continue
                res = main_theorem_residual(p, spec, order, t)
                records.append({
                    "check": f"main_theorem_{order.lower()}",
                    "partition": str(p), "process": args.process,
                    "subdivision": f"limit,t={format_rational(t)}",
                    "residual": format_rational(res), "pass": res == 0,
                })
    _write_report(args, "verify main-theorem", records)
    return 0 if _passed(records) else 1


def _cmd_verify_formula(args) -> int:
    """Coefficient table of the uniform-subdivision trace in powers of 1/N."""
    p = Partition.parse(args.partition)
    base = _parse_process(args.process)
    spec = make_tuple(base, "identical", k=p.k) if base.k == 1 else base
    formula = st_uniform_formula(p, spec, parse_rational(args.t))
    records = [{
        "partition": str(p), "process": args.process,
        "inv_n_power": j, "coefficient": format_rational(c), "pass": True,
    } for j, c in formula.rows()]
    _write_report(args, "verify formula", records)
    return 0


def _cmd_verify_examples(args) -> int:
    t = parse_rational(args.t)
    records = []
    for k in range(1, args.k_max + 1):
        for p in enumerate_noncrossing(k):
            l1, l2 = example_formulas_check(args.which, p, t)
            records.append({
                "check": f"example_{args.which}",
                "partition": str(p), "process": args.which,
                "subdivision": f"limit,t={format_rational(t)}",
                "residual": format_rational(l1), "residual_l2": format_rational(l2),
                "pass": l1 == 0 and l2 == 0,
            })
    _write_report(args, "verify examples", records)
    return 0 if _passed(records) else 1


# ---------------------------------------------------------------------------
# simulate (matrix engine)


def _cmd_simulate_calibrate(args) -> int:
    cfg = MatrixEnsembleConfig(args.dim, args.trials, args.seed, args.model)
    spec = (spec_from_descriptor("free_poisson") if args.model == "poisson_sps"
            else spec_from_descriptor("semicircular"))
    sub = Subdivision.uniform(args.n)
    orders = [1, 2, 3, 4]
    refs = {
        n: exact_moment(make_tuple(spec, "identical", k=n), 1) for n in orders
    }
    records = calibrate(spec, sub, cfg, orders, refs)
    _write_report(args, "simulate calibrate", records, seed=args.seed)
    return 0 if _passed(records) else 1


def _cmd_simulate_main_theorem(args) -> int:
    p = Partition.parse(args.partition)
    cfg = MatrixEnsembleConfig(args.dim, args.trials, args.seed, "poisson_sps")
    record = main_theorem_matrix_residual(p, cfg, Subdivision.uniform(args.n))
    record["pass"] = record["estimate"] < args.threshold
    _write_report(args, "simulate main-theorem", [record], seed=args.seed)
    return 0 if record["pass"] else 1


def _cmd_simulate_proj_decay(args) -> int:
    meshes = [int(x) for x in args.meshes.split(",")]
    cfg = MatrixEnsembleConfig(args.dim, args.trials, args.seed, "poisson_sps")
    records = lem_proj_decay(cfg, meshes, args.k)
    _write_report(args, "simulate proj-decay", records, seed=args.seed)
    return 0 if _passed(records) else 1


# ---------------------------------------------------------------------------
# parser


def _add_output_flags(sub) -> None:
    sub.add_argument("--output", choices=("json", "csv"), default="json")
    sub.add_argument("--out", default=None, help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freestoch",
        description="Partition-indexed free stochastic measures: exact checks and simulations.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    top = parser.add_subparsers(dest="group", required=True)

    parts = top.add_parser("partitions", help="lattice utilities").add_subparsers(
        dest="command", required=True)
    sp = parts.add_parser("enumerate", help="list P(k) or NC(k)")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--noncrossing", action="store_true")
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_partitions_enumerate)
    sp = parts.add_parser("mobius", help="Mobius function of an interval")
    sp.add_argument("--lower", required=True)
    sp.add_argument("--upper", required=True)
    sp.add_argument("--lattice", choices=("full", "noncrossing"), default="full")
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_partitions_mobius)
    sp = parts.add_parser("kreweras", help="Kreweras complement")
    sp.add_argument("--partition", required=True)
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_partitions_kreweras)
    sp = parts.add_parser("classify", help="inner/outer classes")
    sp.add_argument("--partition", required=True)
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_partitions_classify)

    cums = top.add_parser("cumulants", help="moment/cumulant transforms").add_subparsers(
        dest="command", required=True)
    sp = cums.add_parser("to-moments", help="moments from cumulants")
    sp.add_argument("--process", default="free_poisson",
                    help="process name or JSON descriptor")
    sp.add_argument("--order", type=int, default=4)
    sp.add_argument("--functional", default=None,
                    help="path to a cumulant-functional JSON file")
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_cumulants_to_moments)
    sp = cums.add_parser("from-moments", help="cumulants from moments")
    sp.add_argument("--moments", default=None, help="comma-separated rationals m_1..m_k")
    sp.add_argument("--functional", default=None,
                    help="path to a moment-functional JSON file")
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_cumulants_from_moments)

    ver = top.add_parser("verify", help="exact identity checks").add_subparsers(
        dest="command", required=True)
    sp = ver.add_parser("suite", help="the full finite/limit identity battery")
    sp.add_argument("--process", default="free_poisson")
    sp.add_argument("--k-max", dest="k_max", type=int, default=4)
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_verify_suite)
    sp = ver.add_parser("main-theorem", help="inner-scalar factorization residuals")
    sp.add_argument("--process", default="free_poisson")
    sp.add_argument("--k-max", dest="k_max", type=int, default=4)
    sp.add_argument("--order", choices=("L1", "L2", "both"), default="both")
    sp.add_argument("--t", default="1")
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_verify_main_theorem)
    sp = ver.add_parser("examples", help="worked closed-form residuals")
    sp.add_argument("--which", choices=("free_poisson", "brownian"), required=True)
    sp.add_argument("--k-max", dest="k_max", type=int, default=4)
    sp.add_argument("--t", default="1")
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_verify_examples)
    sp = ver.add_parser("formula", help="uniform closed form as a 1/N coefficient table")
    sp.add_argument("--partition", required=True)
    sp.add_argument("--process", default="free_poisson")
    sp.add_argument("--t", default="1")
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_verify_formula)

    sim = top.add_parser("simulate", help="Monte Carlo matrix checks").add_subparsers(
        dest="command", required=True)
    sp = sim.add_parser("calibrate", help="trace moments vs exact references")
    sp.add_argument("--model", choices=("poisson_sps", "gaussian_increments"),
                    default="poisson_sps")
    sp.add_argument("--dim", type=int, default=400)
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--n", type=int, default=16)
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_simulate_calibrate)
    sp = sim.add_parser("main-theorem", help="relative Frobenius residual")
    sp.add_argument("--partition", default="((1,3)(2))")
    sp.add_argument("--dim", type=int, default=300)
    sp.add_argument("--n", type=int, default=40)
    sp.add_argument("--trials", type=int, default=3)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--threshold", type=float, default=0.2)
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_simulate_main_theorem)
    sp = sim.add_parser("proj-decay", help="projection-sandwich norm decay")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--dim", type=int, default=200)
    sp.add_argument("--meshes", default="4,8,16")
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--seed", type=int, default=1)
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_simulate_proj_decay)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, DimensionError, SizeGuardError, CrossingPartitionError,
            OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
