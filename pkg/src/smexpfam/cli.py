"""Command-line front end.

Subcommands: entropy, divergence, fit, sample, sweep, check.  Results go to
stdout as JSON (or CSV for ``sample`` and ``sweep``); floats are printed
with their shortest round-trip representation.  Errors print a single line
``error[<Kind>]: message`` to stderr and exit with

    2  input error (bad spec file, CSV, arguments)
    3  domain error (parameter outside Theta, carrier needed, bad order)
    4  degenerate sample
    5  closed form and Monte Carlo disagree (check)
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import estimation, families, measures
from .errors import (
    DegenerateSample,
    DimensionMismatch,
    FamilyMismatch,
    InvalidOrder,
    InvalidSample,
    OutOfDomain,
    SMError,
)
from .expfam import NaturalParam
from .measures import OrderPair

EXIT_INPUT = 2
EXIT_DOMAIN = 3
EXIT_DEGENERATE = 4
EXIT_CHECK = 5

_INFO_KEYS = {"n", "natural_parameters", "comment"}


class SpecError(Exception):
    """Malformed distribution spec, CSV or command-line value."""


class CheckFailed(Exception):
    pass


# --------------------------------------------------------------------------
# distribution specs
# --------------------------------------------------------------------------


def _matrix(value, field: str) -> np.ndarray:
    try:
        m = np.asarray(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise SpecError(f"field {field!r}: expected a number or nested list of numbers") from None
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise SpecError(f"field {field!r}: expected a square matrix, got shape {m.shape}")
    return m


def _vector(value, field: str) -> np.ndarray:
    try:
        v = np.atleast_1d(np.asarray(value, dtype=np.float64))
    except (TypeError, ValueError):
        raise SpecError(f"field {field!r}: expected a number or list of numbers") from None
    if v.ndim != 1:
        raise SpecError(f"field {field!r}: expected a flat list")
    return v


def _number(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecError(f"field {field!r}: expected a number, got {value!r}")
    return float(value)


def parse_spec(doc) -> NaturalParam:
    """Build a natural parameter from a decoded distribution spec document."""
    if not isinstance(doc, dict):
        raise SpecError("spec must be a JSON object")
    family = doc.get("family")
    if family not in families.FAMILY_IDS:
        raise SpecError(f"field 'family': expected one of {list(families.FAMILY_IDS)}, got {family!r}")
    natural = doc.get("natural", False)
    if not isinstance(natural, bool):
        raise SpecError("field 'natural': expected true or false")
    gaussian = family == families.GAUSSIAN
    if natural:
        required = {"v", "m"} if gaussian else {"v"}
    else:
        required = {"mu", "sigma"} if gaussian else {"rate"}
    unknown = set(doc) - required - {"family", "natural"} - _INFO_KEYS
    if unknown:
        form = "natural" if natural else "source"
        raise SpecError(f"unexpected field(s) {sorted(unknown)} for {family} spec in {form} form")
    missing = sorted(required - set(doc))
    if missing:
        raise SpecError(f"missing field(s) {missing}")
    try:
        if natural:
            m = _matrix(doc["m"], "m") if family == families.GAUSSIAN else None
            return NaturalParam(family, _vector(doc["v"], "v"), m)
        if family == families.GAUSSIAN:
            src = families.GaussianSource.from_arrays(_vector(doc["mu"], "mu"), _matrix(doc["sigma"], "sigma"))
        elif family == families.EXPONENTIAL:
            src = families.ExponentialSource(_number(doc["rate"], "rate"))
        else:
            src = families.PoissonSource(_number(doc["rate"], "rate"))
    except OutOfDomain:
        raise
    except (SMError, ValueError) as exc:
        raise SpecError(str(exc)) from None
    return families.to_natural(src)


def load_spec(path: str) -> NaturalParam:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecError(f"{path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return parse_spec(doc)
    except (SpecError, OutOfDomain) as exc:
        raise type(exc)(f"{path}: {exc}") from None


def _floats(text: str, flag: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise SpecError(f"{flag}: expected comma-separated numbers, got {text!r}") from None


def _inline_spec(args, suffix: str = "") -> Optional[dict]:
    mu = getattr(args, "mu" + suffix)
    sigma = getattr(args, "sigma" + suffix)
    rate = getattr(args, "rate" + suffix)
    flag = suffix.replace("_", "-")
    if mu is None and sigma is None and rate is None:
        return None
    family = args.family or (families.GAUSSIAN if rate is None else None)
    if family is None:
        raise SpecError("--rate needs --family exponential|poisson")
    if family == families.GAUSSIAN:
        if mu is None or sigma is None:
            raise SpecError(f"gaussian needs both --mu{flag} and --sigma{flag}")
        mean = _floats(mu, f"--mu{flag}")
        flat = _floats(sigma, f"--sigma{flag}")
        d = len(mean)
        if len(flat) != d * d:
            raise SpecError(f"--sigma{flag}: expected {d * d} row-major entries for d={d}, got {len(flat)}")
        return {"family": family, "mu": mean, "sigma": np.reshape(flat, (d, d)).tolist()}
    if rate is None:
        raise SpecError(f"{family} needs --rate{flag}")
    return {"family": family, "rate": _floats(rate, f"--rate{flag}")[0]}


def _resolve(args, path: Optional[str], suffix: str = "") -> NaturalParam:
    inline = _inline_spec(args, suffix)
    if path is not None and inline is not None:
        raise SpecError("give either a spec file or inline parameters, not both")
    if path is not None:
        return load_spec(path)
    if inline is None:
        raise SpecError("no distribution given (spec file or --mu/--sigma/--rate)")
    return parse_spec(inline)


def _distributions(args, count: int):
    files = list(args.dist or [])
    if len(files) > count:
        raise SpecError(f"expected at most {count} spec file(s), got {len(files)}")
    files += [None] * (count - len(files))
    p = _resolve(args, files[0])
    if count == 1:
        return (p,)
    return p, _resolve(args, files[1], "_q")


# --------------------------------------------------------------------------
# orders
# --------------------------------------------------------------------------


def entropy_order(kind: str, alpha: Optional[float], beta: Optional[float]) -> OrderPair:
    if kind == "shannon":
        return OrderPair.shannon()
    if alpha is None:
        raise SpecError(f"--alpha is required for kind={kind}")
    if kind == "renyi":
        return OrderPair.renyi(alpha)
    if kind == "tsallis":
        return OrderPair.tsallis(alpha)
    if beta is None:
        raise SpecError("--beta is required for kind=sm")
    return OrderPair(alpha, beta)


def divergence_order(kind: str, alpha: Optional[float], beta: Optional[float]) -> OrderPair:
    return entropy_order("shannon" if kind == "kl" else kind, alpha, beta)


def _grid(text: str, flag: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 3:
        raise SpecError(f"{flag}: expected MIN,MAX,STEPS, got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise SpecError(f"{flag}: expected MIN,MAX,STEPS, got {text!r}") from None
    if steps < 2 or not lo < hi:
        raise SpecError(f"{flag}: need STEPS >= 2 and MIN < MAX")
    return np.linspace(lo, hi, steps)


# --------------------------------------------------------------------------
# evaluation shared by commands
# --------------------------------------------------------------------------


def _entropy(theta: NaturalParam, order: OrderPair) -> measures.EntropyValue:
    return measures.sm_entropy(theta, order)


def _divergence(p: NaturalParam, q: NaturalParam, order: OrderPair) -> measures.DivergenceValue:
    return measures.sm_divergence(p, q, order)


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _order_json(order: OrderPair) -> dict:
    return {"alpha": order.alpha, "beta": order.beta}


def _natural_json(theta: NaturalParam) -> dict:
    out = {"v": theta.vec.tolist()}
    if theta.mat is not None:
        out["m"] = theta.mat.tolist()
    return out


def _source_json(theta: NaturalParam) -> dict:
    src = families.from_natural(theta)
    if isinstance(src, families.GaussianSource):
        return {"mu": src.mu.tolist(), "sigma": src.sigma.entries.tolist()}
    return {"rate": src.rate}


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_entropy(args) -> int:
    (theta,) = _distributions(args, 1)
    order = entropy_order(args.kind, args.alpha, args.beta)
    res = _entropy(theta, order)
    _emit({"value": res.value, "regime": res.regime, "nats": True, **_order_json(order)})
    return 0


def cmd_divergence(args) -> int:
    p, q = _distributions(args, 2)
    order = divergence_order(args.kind, args.alpha, args.beta)
    res = _divergence(p, q, order)
    _emit({"value": res.value, "regime": res.regime, "jensen": res.jensen, "nats": True, **_order_json(order)})
    return 0


def read_samples(path: str, family: str, header: bool = False) -> estimation.SampleSet:
    try:
        with open(path) as fh:
            rows = np.loadtxt(fh, delimiter=",", ndmin=2, skiprows=1 if header else 0)
    except OSError as exc:
        raise SpecError(f"{path}: {exc.strerror}") from None
    except ValueError as exc:
        raise SpecError(f"{path}: {exc}") from None
    if rows.size == 0:
        raise SpecError(f"{path}: no observations")
    dim = rows.shape[1]
    if family != families.GAUSSIAN and dim != 1:
        raise SpecError(f"{path}: {family} samples need one column, got {dim}")
    try:
        return estimation.SampleSet(family, dim, rows)
    except InvalidSample as exc:
        raise SpecError(f"{path}: {exc}") from None


def cmd_fit(args) -> int:
    samples = read_samples(args.input, args.family, args.header)
    theta = estimation.mle_fit(samples)
    _emit({"family": theta.family, "n": samples.n, **_source_json(theta),
           "natural_parameters": _natural_json(theta)})
    return 0


def _format_value(x) -> str:
    return repr(float(x))


def cmd_sample(args) -> int:
    (theta,) = _distributions(args, 1)
    if args.n < 1:
        raise SpecError("--n must be >= 1")
    pts = estimation.sample(theta, args.n, args.seed).points
    if theta.family == families.POISSON:
        lines = (str(int(x)) for x in pts)
    elif pts.ndim == 1:
        lines = (_format_value(x) for x in pts)
    else:
        lines = (",".join(_format_value(x) for x in row) for row in pts)
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def sweep_rows(quantity: str, dists, kind: str, alphas, betas):
    """Yield ``(alpha, beta, value or None, regime)`` in alpha-major order."""
    if quantity == "entropy" and dists[0].kernel.has_carrier:
        measures.sm_entropy(dists[0], OrderPair.shannon())  # raises CarrierNotZero
    for a in alphas:
        a = float(a)
        if kind == "renyi":
            cells = [(a, 1.0)]
        elif kind == "tsallis":
            cells = [(a, a)]
        else:
            cells = [(a, float(b)) for b in betas]
        for a_, b_ in cells:
            try:
                order = OrderPair(a_, b_)
            except InvalidOrder:
                yield a_, b_, None, ""
                continue
            try:
                if quantity == "entropy":
                    value = _entropy(dists[0], order).value
                else:
                    value = _divergence(dists[0], dists[1], order).value
            except (OutOfDomain, OverflowError):
                value = None
            yield a_, b_, value, order.regime


def cmd_sweep(args) -> int:
    count = 1 if args.quantity == "entropy" else 2
    dists = _distributions(args, count)
    alphas = _grid(args.alpha_range, "--alpha-range")
    if alphas[0] <= 0:
        raise SpecError("--alpha-range must be strictly positive")
    betas = _grid(args.beta_range, "--beta-range") if args.kind == "sm" else None
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["alpha", "beta", "value", "regime"])
    for a, b, value, regime in sweep_rows(args.quantity, dists, args.kind, alphas, betas):
        writer.writerow([_format_value(a), _format_value(b), "" if value is None else _format_value(value), regime])
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def check_quantity(quantity: str, dists, order: OrderPair, n: int, seed: int):
    """Closed form and Monte Carlo estimate of one quantity."""
    if quantity == "entropy":
        closed = estimation.sm_entropy_carrier(dists[0], order).value
        mc = estimation.mc_sm_entropy(dists[0], order, n, seed)
    else:
        closed = _divergence(dists[0], dists[1], order).value
        mc = estimation.mc_sm_divergence(dists[0], dists[1], order, n, seed)
    return closed, mc


def cmd_check(args) -> int:
    count = 1 if args.quantity == "entropy" else 2
    dists = _distributions(args, count)
    kind = args.kind
    order = entropy_order(kind, args.alpha, args.beta) if args.quantity == "entropy" else \
        divergence_order(kind, args.alpha, args.beta)
    if args.samples < 2:
        raise SpecError("--samples must be >= 2")
    closed, mc = check_quantity(args.quantity, dists, order, args.samples, args.seed)
    z = mc.z_score(closed)
    ok = abs(z) <= 3.0
    _emit({"quantity": args.quantity, "regime": order.regime, **_order_json(order),
           "closed_form": closed, "mc_estimate": mc.mean, "std_error": mc.std_error,
           "z": z, "pass": ok, "samples": mc.n, "seed": mc.seed})
    if not ok:
        raise CheckFailed(f"closed form {closed!r} vs Monte Carlo {mc.mean!r} (z = {z:.3f})")
    return 0


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        sys.stderr.write(f"error[usage]: {message}\n")
        raise SystemExit(EXIT_INPUT)


def _add_dist_args(p, two: bool = False) -> None:
    p.add_argument("dist", nargs="*", metavar="SPEC.json",
                   help="distribution spec file(s)" + (" for p and q" if two else ""))
    p.add_argument("--family", choices=families.FAMILY_IDS, help="family for inline parameters")
    p.add_argument("--mu", help="inline mean, comma separated")
    p.add_argument("--sigma", help="inline covariance, row-major comma separated")
    p.add_argument("--rate", help="inline rate (exponential, poisson)")
    if two:
        p.add_argument("--mu-q", dest="mu_q")
        p.add_argument("--sigma-q", dest="sigma_q")
        p.add_argument("--rate-q", dest="rate_q")


def _add_order_args(p, kinds) -> None:
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--kind", choices=kinds, default="sm")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="smexpfam", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("entropy", help="closed-form entropy of one distribution")
    _add_dist_args(p)
    _add_order_args(p, ["sm", "renyi", "tsallis", "shannon"])
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("divergence", help="closed-form divergence D(p : q)")
    _add_dist_args(p, two=True)
    _add_order_args(p, ["sm", "renyi", "tsallis", "kl"])
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("fit", help="maximum-likelihood fit from a CSV sample file")
    p.add_argument("input", metavar="SAMPLES.csv")
    p.add_argument("--family", choices=families.FAMILY_IDS, required=True)
    p.add_argument("--header", action="store_true", help="skip one header line")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sample", help="draw samples and write CSV")
    _add_dist_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("sweep", help="CSV grid of entropy or divergence over (alpha, beta)")
    p.add_argument("--quantity", choices=["entropy", "divergence"], required=True)
    _add_dist_args(p, two=True)
    p.add_argument("--kind", choices=["sm", "renyi", "tsallis"], default="sm")
    p.add_argument("--alpha-range", default="0.2,3,50", help="MIN,MAX,STEPS")
    p.add_argument("--beta-range", default="-1,3,50", help="MIN,MAX,STEPS")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="closed form vs Monte Carlo oracle")
    p.add_argument("--quantity", choices=["entropy", "divergence"], required=True)
    _add_dist_args(p, two=True)
    _add_order_args(p, ["sm", "renyi", "tsallis", "shannon", "kl"])
    p.add_argument("--samples", type=int, default=estimation.DEFAULT_SAMPLES)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)
    return parser


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, CheckFailed):
        return EXIT_CHECK
    if isinstance(exc, DegenerateSample):
        return EXIT_DEGENERATE
    if isinstance(exc, (SpecError, FamilyMismatch, DimensionMismatch, InvalidSample)):
        return EXIT_INPUT
    return EXIT_DOMAIN


_LIST_FLAGS = {"--mu", "--sigma", "--rate", "--mu-q", "--sigma-q", "--rate-q",
               "--alpha-range", "--beta-range", "--alpha", "--beta"}
_NEGATIVE_LIST = re.compile(r"^-[\d.]")


def _attach_negative_values(argv: Sequence[str]) -> list:
    """Rewrite ``--flag -1,2`` as ``--flag=-1,2`` so argparse does not read the value as an option."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _LIST_FLAGS and i + 1 < len(argv) and _NEGATIVE_LIST.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_attach_negative_values(argv))
    if args.command in ("check", "sample") and args.seed < 0:
        sys.stderr.write("error[usage]: --seed must be a nonnegative integer\n")
        return EXIT_INPUT
    try:
        return args.func(args)
    except (SpecError, CheckFailed, SMError, OverflowError) as exc:
        kind = type(exc).__name__
        message = " ".join(str(exc).split())
        sys.stderr.write(f"error[{kind}]: {message}\n")
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
