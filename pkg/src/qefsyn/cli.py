"""Command-line front end: instance files, command dispatch, CSV emission.

Instance files are JSON with explicit dimension fields and row-major flat
arrays:

    {
      "plant": {"n": 2, "m": 2, "d": 1, "r": 1,
                "Theta": [...], "R": [...], "M": [...], "N": [...], "D": [...]},
      "weights": {"S": [...], "K": [...]},
      "theta": 0.1,
      "controller": {"a": [...], "b": [...], "c": [...]},        // optional
      "quadrature": {"abs_tol": ..., "rel_tol": ..., "lambda_max": ...},
      "oracle": {"T": ..., "N": ...},
      "synthesis": {"max_iters": ..., "grad_tol": ...}
    }

Exit codes: 0 ok, 2 validation, 3 inadmissible, 4 numerical, 5 io.
"""

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from qefsyn import gramians, oracle
from qefsyn.errors import InadmissibleError, NumericalError, ValidationError
from qefsyn.freq import QuadratureConfig, check_admissible, qef_growth_rate
from qefsyn.grad import frechet_derivatives, optimality_residual
from qefsyn.model import (
    ControllerParams,
    PlantSpec,
    assemble_closed_loop,
    derive_plant,
)
from qefsyn.synth import SynthesisConfig, lqg_controller, synthesize

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INADMISSIBLE = 3
EXIT_NUMERICAL = 4
EXIT_IO = 5


def _fmt(x):
    return f"{float(x):.17g}"


def _matrix(obj, key, rows, cols):
    if key not in obj:
        raise ValidationError(f"missing array {key!r}")
    flat = np.asarray(obj[key], dtype=float)
    if flat.size != rows * cols:
        raise ValidationError(
            f"{key!r} has {flat.size} entries, expected {rows}x{cols}"
        )
    return flat.reshape(rows, cols)


@dataclass
class ProblemInstance:
    """A fully validated problem read from a JSON instance file."""

    spec: PlantSpec
    S: np.ndarray
    K: np.ndarray
    theta: float
    controller: Optional[ControllerParams]
    quad: QuadratureConfig
    oracle_T: Optional[float]
    oracle_N: int
    synthesis: dict


def load_instance(path):
    """Parse and validate a JSON instance file."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read instance file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"instance file is not valid JSON: {exc}") from exc

    try:
        p = doc["plant"]
        n, m, d, r = (int(p[k]) for k in ("n", "m", "d", "r"))
    except KeyError as exc:
        raise ValidationError(f"missing plant field {exc}") from exc
    spec = PlantSpec(
        Theta=_matrix(p, "Theta", n, n),
        R=_matrix(p, "R", n, n),
        M=_matrix(p, "M", m, n),
        N=_matrix(p, "N", d, n),
        D=_matrix(p, "D", r, m),
    )
    w = doc.get("weights")
    if w is None:
        raise ValidationError("missing 'weights'")
    S_flat = np.asarray(w["S"], dtype=float)
    if S_flat.size % n != 0:
        raise ValidationError("weights.S length must be a multiple of n")
    nu = S_flat.size // n
    S = S_flat.reshape(nu, n)
    K = _matrix(w, "K", nu, d)
    theta = float(doc.get("theta", 0.0))

    ctrl = None
    if "controller" in doc:
        cdoc = doc["controller"]
        ctrl = ControllerParams(
            a=_matrix(cdoc, "a", n, n),
            b=_matrix(cdoc, "b", n, r),
            c=_matrix(cdoc, "c", d, n),
        )
    qdoc = doc.get("quadrature", {})
    quad = QuadratureConfig(
        abs_tol=float(qdoc.get("abs_tol", 1e-10)),
        rel_tol=float(qdoc.get("rel_tol", 1e-8)),
        lambda_max=qdoc.get("lambda_max"),
    )
    odoc = doc.get("oracle", {})
    return ProblemInstance(
        spec=spec, S=S, K=K, theta=theta, controller=ctrl, quad=quad,
        oracle_T=odoc.get("T"), oracle_N=int(odoc.get("N", 800)),
        synthesis=doc.get("synthesis", {}),
    )


def controller_to_json(ctrl):
    return {
        "a": [float(x) for x in ctrl.a.ravel()],
        "b": [float(x) for x in ctrl.b.ravel()],
        "c": [float(x) for x in ctrl.c.ravel()],
    }


def _closed_loop(inst, require_controller=True):
    plant = derive_plant(inst.spec)
    ctrl = inst.controller
    if ctrl is None:
        if require_controller:
            raise ValidationError("instance has no controller block")
        ctrl = lqg_controller(plant, (inst.S, inst.K))
    return plant, ctrl, assemble_closed_loop(plant, (inst.S, inst.K), ctrl)


def cmd_validate(inst, args):
    derive_plant(inst.spec)
    if inst.controller is not None:
        _closed_loop(inst)
    print("ok")
    return EXIT_OK


def cmd_evaluate(inst, args):
    _, _, cl = _closed_loop(inst, require_controller=False)
    adm = check_admissible(cl, inst.theta)
    ups0 = gramians.lqg_cost(cl)
    print(f"spec1_sup,{_fmt(adm.spec1_sup)}")
    print(f"psi_min_rel_sigma,{_fmt(adm.psi_min_rel_sigma)}")
    print(f"hurwitz,{int(adm.hurwitz)}")
    print(f"admissible,{int(adm.admissible)}")
    print(f"ups0,{_fmt(ups0)}")
    if not adm.hurwitz or not adm.spec1_ok:
        raise InadmissibleError("cost growth rate undefined for this instance")
    ups = qef_growth_rate(cl, inst.theta, inst.quad)
    print(f"ups,{_fmt(ups)}")
    return EXIT_OK


def cmd_grad_check(inst, args):
    plant, ctrl, cl = _closed_loop(inst, require_controller=False)
    theta = inst.theta
    report = frechet_derivatives(cl, theta, inst.quad)

    def ups_of(ctrl_):
        cl_ = assemble_closed_loop(plant, (inst.S, inst.K), ctrl_)
        return qef_growth_rate(cl_, theta, inst.quad)

    print("block,row,col,analytic,fd,rel_err")
    max_rel = 0.0
    scale = max(optimality_residual(report), 1e-30)
    for name, mat in (("a", report.dUps_da), ("b", report.dUps_db),
                      ("c", report.dUps_dc)):
        base = getattr(ctrl, name)
        for i in range(base.shape[0]):
            for j in range(base.shape[1]):
                h = 1e-5 * (1.0 + abs(base[i, j]))
                up = {f: getattr(ctrl, f).copy() for f in ("a", "b", "c")}
                up[name][i, j] += h
                dn = {f: getattr(ctrl, f).copy() for f in ("a", "b", "c")}
                dn[name][i, j] -= h
                fd = (ups_of(ControllerParams(**up))
                      - ups_of(ControllerParams(**dn))) / (2 * h)
                rel = abs(mat[i, j] - fd) / scale
                max_rel = max(max_rel, rel)
                print(f"{name},{i},{j},{_fmt(mat[i, j])},{_fmt(fd)},{_fmt(rel)}")
    print(f"max_rel_err,{_fmt(max_rel)}")
    return EXIT_OK


def cmd_oracle_compare(inst, args):
    _, _, cl = _closed_loop(inst, require_controller=False)
    theta = inst.theta
    ups = qef_growth_rate(cl, theta, inst.quad)
    T_final = inst.oracle_T or oracle.default_horizon(cl.calA)
    T_list = [T_final / 4, T_final / 2, T_final]
    rows = oracle.growth_rate_estimate(cl, theta, T_list, inst.oracle_N)
    out = args.output or "oracle.csv"
    with open(out, "w") as fh:
        fh.write("T,lnXi_over_T,ups_freq,rel_gap\n")
        for T, rate in rows:
            gap = abs(rate - ups) / abs(ups) if ups != 0 else 0.0
            fh.write(f"{_fmt(T)},{_fmt(rate)},{_fmt(ups)},{_fmt(gap)}\n")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_synthesize(inst, args):
    plant = derive_plant(inst.spec)
    sdoc = inst.synthesis
    cfg = SynthesisConfig(
        theta=inst.theta,
        max_iters=int(sdoc.get("max_iters", 500)),
        grad_tol=float(sdoc.get("grad_tol", 1e-6)),
        initial_step=float(sdoc.get("initial_step", 1.0)),
        backtrack_factor=float(sdoc.get("backtrack_factor", 0.5)),
        armijo_c=float(sdoc.get("armijo_c", 1e-4)),
        quad=inst.quad,
    )
    report = synthesize(plant, (inst.S, inst.K), cfg)
    trace = args.output or "trace.csv"
    with open(trace, "w") as fh:
        fh.write("iter,ups,residual,step\n")
        for it, ups, resid, step in report.iterates:
            fh.write(f"{it},{_fmt(ups)},{_fmt(resid)},{_fmt(step)}\n")
    ctrl_path = args.controller_out or "controller.json"
    with open(ctrl_path, "w") as fh:
        json.dump(controller_to_json(report.controller), fh, indent=2)
        fh.write("\n")
    print(f"termination,{report.termination}")
    print(f"ups,{_fmt(report.cost)}")
    print(f"residual,{_fmt(report.residual)}")
    print(f"wrote {trace} and {ctrl_path}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(
        prog="qefsyn",
        description="Risk-sensitive controller synthesis for linear "
                    "quantum stochastic plants",
    )
    ap.add_argument("command",
                    choices=["validate", "evaluate", "grad-check",
                             "oracle-compare", "synthesize"])
    ap.add_argument("instance", help="path to a JSON instance file")
    ap.add_argument("--theta", type=float, default=None,
                    help="override the instance risk parameter")
    ap.add_argument("--quad-tol", type=float, default=None,
                    help="override both quadrature tolerances")
    ap.add_argument("--lambda-max", type=float, default=None)
    ap.add_argument("--oracle-N", type=int, default=None)
    ap.add_argument("--oracle-T", type=float, default=None)
    ap.add_argument("--seed", type=int, default=None,
                    help="seed for randomized instance generation")
    ap.add_argument("--output", default=None, help="CSV output path")
    ap.add_argument("--controller-out", default=None,
                    help="path for the synthesized controller JSON")
    return ap


_COMMANDS = {
    "validate": cmd_validate,
    "evaluate": cmd_evaluate,
    "grad-check": cmd_grad_check,
    "oracle-compare": cmd_oracle_compare,
    "synthesize": cmd_synthesize,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        inst = load_instance(args.instance)
        if args.theta is not None:
            inst.theta = args.theta
        if args.quad_tol is not None:
            inst.quad.abs_tol = args.quad_tol
            inst.quad.rel_tol = args.quad_tol
        if args.lambda_max is not None:
            inst.quad.lambda_max = args.lambda_max
        if args.oracle_N is not None:
            inst.oracle_N = args.oracle_N
        if args.oracle_T is not None:
            inst.oracle_T = args.oracle_T
        if args.seed is not None:
            np.random.seed(args.seed)
        return _COMMANDS[args.command](inst, args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InadmissibleError as exc:
        print(f"inadmissible: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
