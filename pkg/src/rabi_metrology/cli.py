"""Command-line front end.

Subcommands: ``fidelity``, ``qfi``, ``cfi`` (single-point evaluations),
``sweep`` (grids and figure presets, CSV/JSON), ``oracle`` (brute-force
cross-checks).  Exit codes: 0 ok, 2 usage or config error, 3 numerical
failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__, config, metrics, oracle, sweeps
from .cfi import cfi_cm, cfi_mm, cfi_pdm_with_kinetic, cfi_pdm_without_kinetic
from .exceptions import NumericsError
from .params import GaussianPacket, PhysicalParams, omega_prime, recoil_shift
from .quadrature import build_measurement_grid

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("physical parameters (SI units)")
    group.add_argument("--hbar", type=float, help="reduced Planck constant, J*s")
    group.add_argument("--mass", type=float, help="atomic mass, kg")
    group.add_argument("--rabi", type=float, help="coupling strength, rad/s")
    group.add_argument("--delta", type=float, help="detuning, rad/s")
    group.add_argument("--k0", type=float, help="wavevector, 1/m")
    group.add_argument("--time", "--t", dest="time", type=float, help="evolution time, s")
    group.add_argument("--sigma", type=float, help="packet width, m")
    parser.add_argument("--config", help="key = value config file; flags win")


def _resolve_params(args) -> PhysicalParams:
    params = PhysicalParams()
    if args.config:
        entries = config.load_config(args.config)
        params = config.params_from_entries(entries, params)
    updates = {}
    for key, field in (("hbar", "hbar"), ("mass", "mass"), ("rabi", "rabi"),
                       ("delta", "detuning"), ("k0", "wavevector"),
                       ("time", "time"), ("sigma", "sigma")):
        value = getattr(args, key, None)
        if value is not None:
            updates[field] = value
    return params.replace(**updates) if updates else params


def _print_scalar(label: str, value: float, err: float) -> None:
    print(f"{value:.16e} {err:.3e}  # {label}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rabi-metrology",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fid = sub.add_parser("fidelity", help="overlap of evolutions with/without the kinetic term")
    _add_param_flags(p_fid)
    p_fid.add_argument("--tol", type=float, default=1e-10)

    p_qfi = sub.add_parser("qfi", help="quantum Fisher information for the coupling")
    _add_param_flags(p_qfi)
    p_qfi.add_argument("--variant", choices=("with", "without"), required=True)
    p_qfi.add_argument("--tol", type=float, default=1e-10)

    p_cfi = sub.add_parser("cfi", help="classical Fisher information of a measurement scheme")
    _add_param_flags(p_cfi)
    p_cfi.add_argument("--variant", choices=("with", "without"), required=True)
    p_cfi.add_argument("--scheme", choices=("pdm", "mm", "cm"), required=True)
    p_cfi.add_argument("--tol", type=float, default=1e-12)
    p_cfi.add_argument("--grid-n", type=int, default=32768)

    p_sweep = sub.add_parser("sweep", help="parameter sweeps and figure presets")
    _add_param_flags(p_sweep)
    p_sweep.add_argument("--preset", choices=sorted(sweeps.PRESETS))
    p_sweep.add_argument("--metric", help="comma-separated metric names")
    p_sweep.add_argument("--axis", action="append", default=[],
                         help="name:min:max:count[:scale] or name:explicit:v1,v2,... (max 2)")
    p_sweep.add_argument("--third-k0", type=float,
                         help="third wavevector of preset fig2a (default 3e6)")
    p_sweep.add_argument("--out", help="output file path")
    p_sweep.add_argument("--format", choices=("csv", "json"))
    p_sweep.add_argument("--seed", type=int)
    p_sweep.add_argument("--jobs", type=int)
    p_sweep.add_argument("--tol", type=float, default=1e-10)
    p_sweep.add_argument("--grid-n", type=int, default=32768)

    p_oracle = sub.add_parser("oracle", help="brute-force cross-check suites")
    _add_param_flags(p_oracle)
    p_oracle.add_argument("--target", choices=("qfi", "cfi", "fidelity", "unitary", "convergence"),
                          required=True)
    p_oracle.add_argument("--seed", type=int, default=0)
    p_oracle.add_argument("--draws", type=int, default=20)

    return parser


def _cmd_fidelity(args) -> int:
    params = _resolve_params(args)
    r = metrics.fidelity(params, tol=args.tol)
    _print_scalar("fidelity", r.value, r.estimated_error)
    return EXIT_OK


def _cmd_qfi(args) -> int:
    params = _resolve_params(args)
    if args.variant == "with":
        r = metrics.qfi_with_kinetic(params, tol=args.tol)
    else:
        r = metrics.qfi_without_kinetic(params)
    _print_scalar(f"qfi_{args.variant}", r.value, r.estimated_error)
    return EXIT_OK


def _cmd_cfi(args) -> int:
    params = _resolve_params(args)
    packet = GaussianPacket.from_params(params)
    if args.variant == "without":
        if args.scheme != "pdm":
            print("cfi: --variant without supports --scheme pdm only "
                  "(momentum schemes are defined for the with-kinetic dynamics)",
                  file=sys.stderr)
            return EXIT_USAGE
        value = cfi_pdm_without_kinetic(params)
    elif args.scheme == "pdm":
        value = cfi_pdm_with_kinetic(params, packet, tol=args.tol)
    else:
        grid = build_measurement_grid(params, args.grid_n)
        fn = cfi_mm if args.scheme == "mm" else cfi_cm
        value = fn(params, packet, grid)
    _print_scalar(f"cfi_{args.scheme}_{args.variant}", value, 0.0)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    if args.preset and (args.metric or args.axis):
        print("sweep: --preset conflicts with --metric/--axis", file=sys.stderr)
        return EXIT_USAGE
    entries = {}
    if args.config:
        entries = config.load_config(args.config)
    if args.preset:
        spec = sweeps.build_preset(args.preset, args.third_k0)
    else:
        if args.third_k0 is not None:
            print("sweep: --third-k0 only applies to preset fig2a", file=sys.stderr)
            return EXIT_USAGE
        metric_text = args.metric or entries.get("metric")
        axis_texts = args.axis or [entries[k] for k in ("axis1", "axis2") if k in entries]
        if not metric_text or not axis_texts:
            print("sweep: need --preset, or --metric plus 1..2 --axis specs "
                  "(possibly from --config)", file=sys.stderr)
            return EXIT_USAGE
        if len(axis_texts) > 2:
            print("sweep: at most 2 axes", file=sys.stderr)
            return EXIT_USAGE
        axes = tuple(config.parse_axis_spec(t) for t in axis_texts)
        metrics_tuple = tuple(m.strip() for m in metric_text.split(","))
        spec = sweeps.SweepSpec(metrics=metrics_tuple, axes=axes, tol=args.tol,
                                grid_n=args.grid_n)
    # flags / config override the preset's fixed record
    params = spec.base_params()
    if args.config:
        params = config.params_from_entries(entries, params)
    for key, field in (("hbar", "hbar"), ("mass", "mass"), ("rabi", "rabi"),
                       ("delta", "detuning"), ("k0", "wavevector"),
                       ("time", "time"), ("sigma", "sigma")):
        value = getattr(args, key, None)
        if value is not None:
            params = params.replace(**{field: value})
    fixed = (("mass", params.mass), ("rabi", params.rabi), ("delta", params.detuning),
             ("k0", params.wavevector), ("time", params.time), ("sigma", params.sigma))
    spec = sweeps.SweepSpec(
        metrics=spec.metrics, axes=spec.axes, fixed=fixed, hbar_override=params.hbar,
        tol=spec.tol, grid_n=spec.grid_n, preset=spec.preset)

    out = args.out or entries.get("out")
    fmt = args.format or entries.get("format", "csv")
    try:
        seed = args.seed if args.seed is not None else int(entries.get("seed", 0))
        jobs = args.jobs if args.jobs is not None else int(entries.get("jobs", 1))
    except ValueError as exc:
        raise config.ConfigError(f"seed/jobs must be integers: {exc}") from exc
    result = sweeps.run_sweep(spec, out=out, fmt=fmt, jobs=jobs, seed=seed)
    n_failed = sum(1 for row in result.rows if row[-1])
    print(f"sweep: {len(result.rows)} points, {n_failed} flagged"
          + (f", wrote {out}" if out else ""))
    return EXIT_OK


def _cmd_oracle(args) -> int:
    params = _resolve_params(args)
    rng = np.random.default_rng(args.seed)
    print(f"oracle target={args.target} seed={args.seed} draws={args.draws}")
    ok = True
    if args.target == "unitary":
        worst = 0.0
        for i in range(args.draws):
            pp = oracle.draw_parameters(rng, params)
            q = float(rng.uniform(-2.0, 2.0)) * pp.hbar / pp.sigma
            u_rk = oracle.evolve_numeric(pp, q, steps=400_000)
            u_cl = oracle.evolve_closed(pp, q)
            err = float(np.max(np.abs(u_rk - u_cl)))
            unit = float(np.max(np.abs(u_rk @ u_rk.conj().T - np.eye(2))))
            print(f"  draw {i}: rk4-vs-closed {err:.3e}  unitarity {unit:.3e}")
            worst = max(worst, err, unit)
        ok = worst < 1e-8
        print(f"worst error {worst:.3e}  tolerance 1e-08  {'PASS' if ok else 'FAIL'}")
    elif args.target == "convergence":
        u_ref = oracle.evolve_closed(params, 0.0)
        e1 = float(np.max(np.abs(oracle.evolve_numeric(params, 0.0, 25_000) - u_ref)))
        e2 = float(np.max(np.abs(oracle.evolve_numeric(params, 0.0, 50_000) - u_ref)))
        order = float(np.log2(e1 / e2))
        ok = 3.7 <= order <= 4.3
        print(f"errors {e1:.3e} -> {e2:.3e}, measured order {order:.3f}  "
              f"{'PASS' if ok else 'FAIL'} (window [3.7, 4.3])")
    elif args.target == "qfi":
        worst = 0.0
        for i in range(args.draws):
            pp = oracle.draw_parameters(rng, params)
            a = metrics.qfi_with_kinetic(pp, tol=1e-11).value
            b = oracle.qfi_fd(pp)
            rel = abs(a - b) / abs(a)
            print(f"  draw {i}: analytic {a:.6e}  fd {b:.6e}  rel {rel:.3e}")
            worst = max(worst, rel)
        ok = worst < 1e-5
        print(f"worst relative error {worst:.3e}  tolerance 1e-05  {'PASS' if ok else 'FAIL'}")
    elif args.target == "fidelity":
        worst = 0.0
        for i in range(args.draws):
            pp = oracle.draw_parameters(rng, params)
            a = metrics.fidelity(pp, tol=1e-11).value
            b = oracle.fidelity_numeric(pp)
            err = abs(a - b)
            print(f"  draw {i}: analytic {a:.8f}  numeric {b:.8f}  abs {err:.3e}")
            worst = max(worst, err)
        ok = worst < 1e-6
        # pinned special case: no wavevector, closed-form overlap
        pp = params.replace(wavevector=0.0)
        closed = (1.0 + (pp.hbar * pp.time / (2.0 * pp.mass * pp.sigma**2)) ** 2) ** -0.5
        a = metrics.fidelity(pp, tol=1e-11).value
        err0 = abs(a - closed)
        print(f"  k0=0 closed form: analytic {a:.10f}  closed {closed:.10f}  abs {err0:.3e}")
        ok = ok and err0 < 1e-7
        print(f"worst error {max(worst, err0):.3e}  {'PASS' if ok else 'FAIL'}")
    elif args.target == "cfi":
        worst = 0.0
        for i in range(args.draws):
            pp = oracle.draw_parameters(rng, params)
            rels = []
            for scheme, analytic in (
                ("pdm", cfi_pdm_with_kinetic(pp)),
                ("mm", cfi_mm(pp)),
                ("cm", cfi_cm(pp)),
            ):
                fd = oracle.cfi_fd(pp, scheme=scheme)
                rels.append(abs(analytic - fd) / max(abs(analytic), 1e-300))
            print(f"  draw {i}: rel errors pdm {rels[0]:.3e}  mm {rels[1]:.3e}  cm {rels[2]:.3e}")
            worst = max(worst, *rels)
        ok = worst < 1e-5
        print(f"worst relative error {worst:.3e}  tolerance 1e-05  {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    handlers = {
        "fidelity": _cmd_fidelity,
        "qfi": _cmd_qfi,
        "cfi": _cmd_cfi,
        "sweep": _cmd_sweep,
        "oracle": _cmd_oracle,
    }
    try:
        return handlers[args.command](args)
    except config.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericsError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
