#!/usr/bin/env python3
"""Emit the canonical test plant as a CLI instance file (JSON schema)."""

import argparse
import json

import numpy as np

from qefsyn.instances import (
    canonical_plant_spec,
    canonical_weights_lqg,
    canonical_weights_square,
)
from qefsyn.model import derive_plant
from qefsyn.synth import lqg_controller


def flat(M):
    return [float(x) for x in np.asarray(M).ravel()]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("output", help="path of the JSON instance file to write")
    ap.add_argument("--theta", type=float, default=0.05)
    ap.add_argument("--stacked-weights", action="store_true",
                    help="use the nu=3 state/control penalty instead of the "
                         "square nu=2 weights")
    ap.add_argument("--with-controller", action="store_true",
                    help="embed the LQG controller in the instance")
    args = ap.parse_args()

    spec = canonical_plant_spec()
    S, K = (canonical_weights_lqg() if args.stacked_weights
            else canonical_weights_square())
    doc = {
        "plant": {"n": 2, "m": 2, "d": 1, "r": 1,
                  "Theta": flat(spec.Theta), "R": flat(spec.R),
                  "M": flat(spec.M), "N": flat(spec.N), "D": flat(spec.D)},
        "weights": {"S": flat(S), "K": flat(K)},
        "theta": args.theta,
    }
    if args.with_controller:
        ctrl = lqg_controller(derive_plant(spec), (S, K))
        doc["controller"] = {"a": flat(ctrl.a), "b": flat(ctrl.b),
                             "c": flat(ctrl.c)}
    with open(args.output, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
