"""``pftl-check``: check a frequency temporal logic formula against a model file.

Exit status: 0 the property holds at the initial state, 1 it fails,
2 the statistical test was inconclusive, 3 usage, parse or model error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .formula import (Fragment, FormulaError, FormulaSyntaxError, classify_fragment, format_formula,
                      is_bounded_ltl_like, parse_formula)
from .model import Dtmc, ModelError, validate_model
from .modelfile import load_model
from .numerical import CheckOptions, FragmentError, NumericError, check
from .statistical import SprtConfig, SprtConfigError, run_statistical

EXIT_HOLDS, EXIT_FAILS, EXIT_INCONCLUSIVE, EXIT_ERROR = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pftl-check", description="Model check frequency temporal logic on Markov chains.")
    p.add_argument("--model", required=True, help="model file in the .pfmc format")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--formula", help="formula text")
    src.add_argument("--formula-file", help="file holding the formula")
    p.add_argument("--engine", choices=("auto", "numerical", "statistical"), default="auto")
    p.add_argument("--epsilon", type=float, default=1e-10, help="Poisson truncation error")
    p.add_argument("--max-iterations", type=int, default=100_000)
    p.add_argument("--lambda", dest="rate", type=float, default=None, help="uniformization rate")
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--beta", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-samples", type=int, default=1_000_000)
    p.add_argument("--workers", type=int, default=None, help="threads for path sampling")
    p.add_argument("--renormalize", action="store_true", help="rescale DTMC rows to sum to one")
    p.add_argument("--json", action="store_true", help="print a JSON record")
    return p


def _load_model(args):
    model = load_model(args.model)
    if args.renormalize and isinstance(model, Dtmc):
        model = model.renormalized()
    problems = validate_model(model)
    if problems:
        raise ModelError("invalid model:\n  " + "\n  ".join(problems))
    return model


def _pick_engine(args, phi) -> str:
    frag = classify_fragment(phi)
    if args.engine == "auto":
        if frag is Fragment.CTL_LIKE:
            return "numerical"
        if frag is Fragment.BOUNDED_LTL_LIKE:
            return "statistical"
        raise UsageError(
            "formula is in neither supported fragment: the numerical engine needs state-formula "
            "operands under X, U and Q; the statistical engine needs P~p with 0<p<1 over a path "
            "formula without nested P or X and with bounded intervals")
    if args.engine == "numerical" and frag is not Fragment.CTL_LIKE:
        hint = " (try --engine statistical)" if frag is Fragment.BOUNDED_LTL_LIKE else ""
        raise UsageError(f"formula is not in the numerical engine's fragment{hint}")
    if args.engine == "statistical" and not is_bounded_ltl_like(phi):
        hint = " (try --engine numerical)" if frag is Fragment.CTL_LIKE else ""
        raise UsageError(f"formula is not in the statistical engine's fragment{hint}")
    return args.engine


def _numerical(args, model, phi):
    opts = CheckOptions(epsilon=args.epsilon, max_iterations=args.max_iterations,
                        uniformization_rate=args.rate)
    res = check(model, phi, opts)
    record = {"engine": "numerical", "formula": format_formula(phi), "holds": res.holds,
              "initialState": model.initial,
              "sat": [int(s) for s in np.flatnonzero(res.sat)]}
    if res.probabilities is not None:
        record["probability"] = float(res.probabilities[model.initial])
        record["probabilities"] = [float(x) for x in res.probabilities]
    if args.json:
        print(json.dumps(record, sort_keys=True))
    else:
        print(f"formula: {record['formula']}")
        print(f"result: {'holds' if res.holds else 'fails'} at initial state {model.initial}")
        if "probability" in record:
            print(f"probability: {record['probability']:.12g}")
            print("probabilities: " + " ".join(f"{x:.12g}" for x in record["probabilities"]))
        print("satisfying states: " + " ".join(str(s) for s in record["sat"]))
    return EXIT_HOLDS if res.holds else EXIT_FAILS


def _statistical(args, model, phi):
    cfg = SprtConfig(alpha=args.alpha, beta=args.beta, delta=args.delta, max_samples=args.max_samples)
    res = run_statistical(model, phi, cfg, seed=args.seed, workers=args.workers)
    record = dict(res.to_record(), engine="statistical")
    if args.json:
        print(json.dumps(record, sort_keys=True))
    else:
        print(f"formula: {res.formula}")
        print(f"result: {res.verdict}")
        print(f"samples: {res.samples_used} (satisfying {res.m}), log likelihood ratio {res.log_lambda:.6g}")
        print(f"seed: {res.seed}")
    return {"holds": EXIT_HOLDS, "fails": EXIT_FAILS}.get(res.verdict, EXIT_INCONCLUSIVE)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    text = ""
    try:
        text = args.formula if args.formula is not None else Path(args.formula_file).read_text(encoding="utf-8")
        text = text.strip()
        phi = parse_formula(text)
        model = _load_model(args)
        engine = _pick_engine(args, phi)
        if engine == "numerical":
            return _numerical(args, model, phi)
        return _statistical(args, model, phi)
    except FormulaSyntaxError as exc:
        caret = " " * exc.position + "^"
        print(f"pftl-check: formula error: {exc}\n  {text}\n  {caret}", file=sys.stderr)
    except (UsageError, FragmentError, FormulaError, ModelError, SprtConfigError, NumericError, OSError) as exc:
        print(f"pftl-check: error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
