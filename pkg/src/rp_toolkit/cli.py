"""Command-line front end.

Exit codes: 0 success, 1 validation/usage error, 2 tolerance or
certificate failure.  Every output embeds the tool version, the fully
merged run configuration, and the seed, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .chessboard import (duality_pt, gaussian_domination_bruteforce,
                         gradient_block_determinant, gradient_excess,
                         peierls_certificate)
from .kernels import (KernelError, NearestNeighbor, PowerLaw, Yukawa,
                      periodize, torus_greens, transience_integral)
from .meanfield import (beta_dot_from_delta, locate_transition,
                        potts_on_axis_value)
from .models import ModelError, ModelSpec
from .quadrature import QuadratureSpec
from .sampling import (SamplerSpec, check_infrared_bound, estimate_two_point,
                       run_chain, spin_wave_condensation_stat)
from .spinwave import SpinWaveIntegrand, minimize_over_theta, sw_free_energy
from .torus import TorusSpec

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors map to the validation exit code
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _threads() -> int:
    env = os.environ.get("RP_TOOLKIT_THREADS")
    if env is not None:
        return max(1, int(env))
    return os.cpu_count() or 1


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def emit_csv(records, schema, path, meta):
    """Write rows under fixed columns, floats at 17 significant digits.

    Metadata (version, config, seed) goes into '#'-prefixed lines above
    the header; LF endings, UTF-8.
    """
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for key in sorted(meta):
                fh.write(f"# {key}: {json.dumps(meta[key], sort_keys=True)}\n")
            fh.write(",".join(schema) + "\n")
            for rec in records:
                fh.write(",".join(_fmt(rec[c]) for c in schema) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path!r}: {exc}") from exc


def read_csv(path):
    """Reader matched to emit_csv: returns (meta, schema, records)."""
    meta, schema, records = {}, None, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                key, _, val = line[2:].partition(": ")
                meta[key] = json.loads(val)
            elif schema is None:
                schema = line.split(",")
            elif line:
                vals = line.split(",")
                records.append({c: _parse_field(v)
                                for c, v in zip(schema, vals)})
    return meta, schema, records


def _parse_field(text):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _write_json(payload, path):
    text = json.dumps(payload, sort_keys=True, indent=2, default=_json_default)
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _kernel_from_args(args):
    if args.kind == "nn":
        return NearestNeighbor(args.dim)
    if args.kind == "yukawa":
        if args.mu is None:
            raise KernelError("yukawa kernel needs --mu")
        return Yukawa(args.dim, args.mu)
    if args.kind == "powerlaw":
        if args.s is None:
            raise KernelError("power-law kernel needs --s")
        return PowerLaw(args.dim, args.s)
    raise KernelError(f"unknown kernel kind {args.kind!r}")


def _config(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items())
           if k not in ("func", "config", "out") and v is not None}
    cfg["version"] = __version__
    cfg["threads"] = _threads()
    return cfg


# ---------------------------------------------------------------------------
# subcommands


def _cmd_kernel(args):
    kernel = _kernel_from_args(args)
    disp, w = kernel.support()
    payload = {
        "config": _config(args),
        "support_size": int(len(disp)),
        "total_mass": float(w.sum()),
        "jhat_zero": float(kernel.fourier(np.zeros((1, args.dim)))[0]),
        "jhat_pi": float(kernel.fourier(np.full((1, args.dim), math.pi))[0]),
    }
    _write_json(payload, args.out)
    return EXIT_OK


def _cmd_walk(args):
    kernel = _kernel_from_args(args)
    quad = QuadratureSpec(grid_points_per_axis=args.grid) if args.grid else None
    res = transience_integral(kernel, quad)
    payload = {"config": _config(args), "transient": res.transient}
    if res.transient:
        payload["integral"] = res.value
        payload["error"] = res.error
        if args.tol is not None and res.error > args.tol:
            _write_json(payload, args.out)
            return EXIT_FAILED
    _write_json(payload, args.out)
    return EXIT_OK


def _cmd_greens(args):
    kernel = _kernel_from_args(args)
    records = []
    for L in args.sizes:
        torus = TorusSpec(d=args.dim, L=L)
        records.append({"L": L, "greens_00": torus_greens(torus, kernel)})
    meta = {"config": _config(args), "seed": args.seed,
            "version": __version__}
    if args.out:
        emit_csv(records, ["L", "greens_00"], args.out, meta)
    else:
        _write_json({"meta": meta, "records": records}, None)
    return EXIT_OK


def _run_mc(args):
    model = ModelSpec(family=args.family, n=args.n, q=args.q)
    torus = TorusSpec(d=args.dim, L=args.L)
    kernel = _kernel_from_args(args)
    couplings = periodize(kernel, torus)
    sampler = SamplerSpec(beta=args.beta, sweeps=args.sweeps,
                          burn_in=args.burn_in, thinning=args.thinning,
                          seed=args.seed)
    samples = list(run_chain(model, couplings, sampler))
    return model, torus, kernel, couplings, samples


def _cmd_mc_irb(args):
    model, torus, kernel, couplings, samples = _run_mc(args)
    estimate = estimate_two_point(samples, torus)
    cert = check_infrared_bound(estimate, couplings, args.beta, model.nu)
    payload = {"config": _config(args), "seed": args.seed,
               "certificate": cert}
    _write_json(payload, args.out)
    return EXIT_OK if cert.verdict else EXIT_FAILED


def _cmd_mc_condense(args):
    model, torus, kernel, couplings, samples = _run_mc(args)
    cert = spin_wave_condensation_stat(samples, kernel, args.beta)
    payload = {"config": _config(args), "seed": args.seed,
               "certificate": cert}
    _write_json(payload, args.out)
    return EXIT_OK if cert.verdict else EXIT_FAILED


def _cmd_meanfield(args):
    beta0, beta_t = locate_transition(args.q)
    grid = np.linspace(args.m_min, args.m_max, args.points)
    records = []
    for beta_delta in (args.beta_delta if args.beta_delta else [beta_t]):
        for m in grid:
            records.append({
                "normalization": "beta_delta",
                "beta_delta": beta_delta,
                "beta_dot": beta_dot_from_delta(args.q, beta_delta),
                "m": float(m),
                "phi": potts_on_axis_value(args.q, beta_delta, float(m)),
            })
    meta = {"config": _config(args), "seed": args.seed,
            "version": __version__, "beta_0_delta": beta0,
            "beta_t_delta": beta_t}
    schema = ["normalization", "beta_delta", "beta_dot", "m", "phi"]
    if args.out:
        emit_csv(records, schema, args.out, meta)
    else:
        _write_json({"meta": meta, "records": records[:5],
                     "note": "use --out for the full profile"}, None)
    return EXIT_OK


def _cmd_spinwave(args):
    thetas = np.linspace(0.0, 2 * math.pi, args.resolution, endpoint=False)
    records = []
    gamma = args.gamma if args.family == "AFM2D" else None
    quad = QuadratureSpec(
        grid_points_per_axis=128 if args.family != "OneTwenty3D" else 32)
    for th in thetas:
        f, err = sw_free_energy(
            SpinWaveIntegrand(family=args.family, theta=float(th),
                              gamma=gamma), quad)
        records.append({"theta": float(th), "F": f, "quad_error": err})
    minima = minimize_over_theta(args.family, gamma=gamma,
                                 resolution=args.resolution, quad=quad)
    meta = {"config": _config(args), "seed": args.seed,
            "version": __version__,
            "minima": [float(t) for t in minima.minima],
            "margin": minima.margin, "degenerate": minima.degenerate}
    if args.out:
        emit_csv(records, ["theta", "F", "quad_error"], args.out, meta)
    else:
        _write_json({"meta": meta, "n_records": len(records)}, None)
    return EXIT_OK


def _cmd_chessboard(args):
    if args.domination:
        torus = TorusSpec(d=1, L=4)
        rng = np.random.default_rng(args.seed)
        hs = rng.uniform(-1.0, 1.0, size=(args.h_samples, torus.N))
        cert = gaussian_domination_bruteforce(args.beta, args.kappa, torus, hs)
    else:
        cert = peierls_certificate(args.beta, args.kappa, args.c)
    payload = {"config": _config(args), "seed": args.seed,
               "certificate": cert}
    _write_json(payload, args.out)
    return EXIT_OK if cert.verdict else EXIT_FAILED


def _cmd_gradient(args):
    ko, kd = args.kappa_o, args.kappa_d
    k_eq = np.array([0.9, 1.7])
    det_mixed = float(gradient_block_determinant(k_eq, ko, ko))
    excess = gradient_excess(ko, kd)
    payload = {
        "config": _config(args), "seed": args.seed,
        "excess_three_one": excess,
        "p_t": duality_pt(ko, kd),
        "p_t_swap_sum": duality_pt(ko, kd) + duality_pt(kd, ko),
        "det_at_equal_kappa": det_mixed,
    }
    _write_json(payload, args.out)
    return EXIT_OK


def _cmd_oracle(args):
    """Fast self-checks of closed-form anchors."""
    checks = {}
    res = transience_integral(NearestNeighbor(3))
    checks["watson_d3"] = abs(res.value - 1.5163860591519780) < 1e-4
    checks["recurrent_d2"] = not transience_integral(NearestNeighbor(2)).transient
    checks["duality_swap"] = abs(duality_pt(2.0, 5.0) + duality_pt(5.0, 2.0) - 1.0) < 1e-15
    b, k = 1.3, 4.7
    checks["variance_identity"] = abs(
        0.5 * k * k * (1 / k - 1 / (8 * b + k)) - 4 * b * k / (8 * b + k)) < 1e-12
    f4, _ = sw_free_energy(SpinWaveIntegrand("Compass2D", math.pi / 4))
    catalan = 0.9159655941772190
    checks["compass_quarter_pi"] = abs(
        f4 - 0.5 * (4 * catalan / math.pi - math.log(2))) < 1e-3
    payload = {"config": _config(args), "checks": checks,
               "all_pass": all(checks.values())}
    _write_json(payload, args.out)
    return EXIT_OK if payload["all_pass"] else EXIT_FAILED


# ---------------------------------------------------------------------------
# argument wiring


def _add_kernel_args(p):
    p.add_argument("--kind", default="nn", choices=["nn", "yukawa", "powerlaw"])
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--mu", type=float)
    p.add_argument("--s", type=float)


def build_parser() -> _Parser:
    parser = _Parser(prog="rp-toolkit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default parameters")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output path (JSON, or CSV where noted)")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    def add_parser(name):
        return sub.add_parser(name, parents=[common])

    p = add_parser("kernel");  _add_kernel_args(p); p.set_defaults(func=_cmd_kernel)

    p = add_parser("walk");  _add_kernel_args(p)
    p.add_argument("--tol", type=float)
    p.add_argument("--grid", type=int)
    p.set_defaults(func=_cmd_walk)

    p = add_parser("greens");  _add_kernel_args(p)
    p.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 16])
    p.set_defaults(func=_cmd_greens)

    for name, fn in (("mc-irb", _cmd_mc_irb), ("mc-condense", _cmd_mc_condense)):
        p = add_parser(name);  _add_kernel_args(p)
        p.add_argument("--family", default="O_n")
        p.add_argument("--n", type=int, default=2)
        p.add_argument("--q", type=int)
        p.add_argument("--L", type=int, default=6)
        p.add_argument("--beta", type=float, required=True)
        p.add_argument("--sweeps", type=int, default=20000)
        p.add_argument("--burn-in", type=int, default=2000)
        p.add_argument("--thinning", type=int, default=1)
        p.set_defaults(func=fn)

    p = add_parser("meanfield")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--beta-delta", type=float, nargs="*")
    p.add_argument("--m-min", type=float, default=0.0)
    p.add_argument("--m-max", type=float, default=0.999)
    p.add_argument("--points", type=int, default=201)
    p.set_defaults(func=_cmd_meanfield)

    p = add_parser("spinwave")
    p.add_argument("--family", required=True,
                   choices=["Compass2D", "OneTwenty3D", "AFM2D"])
    p.add_argument("--gamma", type=float)
    p.add_argument("--resolution", type=int, default=360)
    p.set_defaults(func=_cmd_spinwave)

    p = add_parser("chessboard")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--c", type=float, default=12.0)
    p.add_argument("--domination", action="store_true",
                   help="run the d=1 L=4 brute-force Z(h) <= Z(0) check")
    p.add_argument("--h-samples", type=int, default=20)
    p.set_defaults(func=_cmd_chessboard)

    p = add_parser("gradient")
    p.add_argument("--kappa-o", type=float, required=True)
    p.add_argument("--kappa-d", type=float, required=True)
    p.set_defaults(func=_cmd_gradient)

    p = add_parser("oracle")
    p.set_defaults(func=_cmd_oracle)
    return parser


def _apply_config_file(parser, argv):
    """JSON config supplies defaults; explicit flags win."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    path = argv[idx + 1]
    with open(path, encoding="utf-8") as fh:
        defaults = json.load(fh)
    extra = []
    for key, val in sorted(defaults.items()):
        flag = "--" + key.replace("_", "-")
        if flag in argv:
            continue
        if isinstance(val, bool):
            if val:
                extra.append(flag)
        elif isinstance(val, list):
            extra.extend([flag] + [str(v) for v in val])
        else:
            extra.extend([flag, str(val)])
    # insert defaults after the subcommand token so argparse scopes them
    return argv + extra


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
    except (OSError, json.JSONDecodeError, IndexError) as exc:
        sys.stderr.write(f"rp-toolkit: bad config file: {exc}\n")
        return EXIT_INVALID
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, KernelError, ModelError, OSError) as exc:
        sys.stderr.write(f"rp-toolkit: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
