"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 input-file error, 4 a numerical
invariant failed (which means a bug, never a valid result).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from typing import Sequence

from . import experiments as ex
from .channels import (
    QuantumChannel,
    basis_contraction,
    channel_from_json,
    choi,
    depolarizing,
    identity_channel,
    is_entanglement_breaking,
    named_unitary,
    random_channel,
)
from .errors import EntlabError, InvariantViolation, NotTracePreserving, ParamOutOfRange
from .measures import concurrence

SCHEMA = "entlab/1"
CSV_HEADER = ("family", "param", "e_in", "e_out", "measure", "channel")
EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INVARIANT = 0, 2, 3, 4

log = logging.getLogger("entlab")


class UsageError(Exception):
    pass


class InputFileError(Exception):
    pass


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def rows_to_csv(rows: Sequence[ex.EntanglementReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow((r.family, fmt_float(r.family_param), fmt_float(r.e_in), fmt_float(r.e_out),
                    r.measure, r.channel))
    return buf.getvalue()


def rows_from_csv(text: str) -> list[ex.EntanglementReport]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [ex.EntanglementReport(r["family"], float(r["param"]), float(r["e_in"]),
                                  float(r["e_out"]), r["channel"], r["measure"]) for r in reader]


def row_dict(r: ex.EntanglementReport) -> dict:
    return {"family": r.family, "param": r.family_param, "e_in": r.e_in, "e_out": r.e_out,
            "measure": r.measure, "channel": r.channel}


def _default_seed() -> int:
    env = os.environ.get("ENTLAB_SEED")
    if env is None:
        return 0
    try:
        return _seed(env)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"ENTLAB_SEED: {exc}") from None


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=None,
                        help="64-bit unsigned seed (default: $ENTLAB_SEED or 0)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    chan = argparse.ArgumentParser(add_help=False)
    chan.add_argument("--channel", choices=("depolarizing", "unitary", "contraction", "identity", "random"),
                      default=None)
    chan.add_argument("--param", default=None,
                      help="depolarizing: p in [0,1]; unitary: gate I/X/Y/Z/H; "
                           "contraction: target basis index; random: channel index")
    chan.add_argument("--channel-file", help="channel in the JSON Kraus format")

    p = argparse.ArgumentParser(prog="entlab", description="Entanglement under local channels E⊗I.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("diagram", parents=[common, chan], help="input/output concurrence diagram")
    d.add_argument("--families", default="werner,schmidt")
    d.add_argument("--grid", type=_positive_int, default=101)
    d.add_argument("--no-bound", action="store_true", help="omit the reference-line rows")

    t = sub.add_parser("theorem-check", parents=[common, chan],
                       help="output concurrence never exceeds the Choi-state value")
    t.add_argument("--samples", type=_positive_int, default=10_000)
    t.add_argument("--random-channels", type=int, default=0,
                   help="also check this many random Stinespring channels")
    t.add_argument("--pure", action="store_true", help="sample pure input states only")

    i = sub.add_parser("iso-check", parents=[common, chan],
                       help="images of all maximally entangled states share one concurrence")
    i.add_argument("--samples", type=_positive_int, default=100)

    e1 = sub.add_parser("example1", parents=[common], help="Werner vs Schmidt ordering flip")
    e1.add_argument("--p", type=float, default=0.5)
    e1.add_argument("--epsilon", type=float, default=0.1)
    e1.add_argument("--grid", type=_positive_int, default=None, help="also emit both curves")

    e2 = sub.add_parser("example2", parents=[common], help="four-qubit contraction flip")
    e2.add_argument("--alpha2", type=float, default=0.8)

    s = sub.add_parser("invert-search", parents=[common, chan], help="search for an ordering inversion")
    s.add_argument("--delta", type=float, default=1e-3)
    s.add_argument("--mode", choices=("families", "random"), default="families")
    s.add_argument("--samples", type=_positive_int, default=1001)

    sub.add_parser("validate-channel", parents=[common, chan], help="load and classify a channel")
    return p


def resolve_channel(args, seed: int, default: str | None = "depolarizing") -> QuantumChannel:
    if args.channel_file:
        if args.channel:
            raise UsageError("give either --channel or --channel-file, not both")
        try:
            with open(args.channel_file, encoding="utf-8") as fh:
                text = fh.read()
            return channel_from_json(text, name=f"file:{os.path.basename(args.channel_file)}")
        except NotTracePreserving as exc:
            raise InputFileError(f"{args.channel_file}: {exc} (defect {exc.defect:.3e})") from exc
        except (OSError, ValueError) as exc:
            raise InputFileError(f"{args.channel_file}: {exc}") from exc
    kind = args.channel or default
    if kind is None:
        raise UsageError("a channel is required (--channel or --channel-file)")
    param = args.param
    try:
        if kind == "depolarizing":
            return depolarizing(float(param) if param is not None else 0.5)
        if kind == "unitary":
            return named_unitary(param or "I")
        if kind == "contraction":
            return basis_contraction(int(param) if param is not None else 0)
        if kind == "identity":
            return identity_channel(2)
        if kind == "random":
            index = int(param) if param is not None else 0
            return random_channel(ex.sample_rng(seed, index, ex.STREAM_CHANNELS),
                                  name=f"stinespring(seed={seed}, index={index})")
    except (ValueError, ParamOutOfRange) as exc:
        raise UsageError(f"--param: {exc}") from exc
    raise UsageError(f"unknown channel {kind!r}")


def _json_doc(command: str, seed: int, **payload) -> str:
    doc = {"schema": SCHEMA, "command": command, "seed": seed}
    doc.update(payload)
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _cmd_diagram(args, seed):
    ch = resolve_channel(args, seed)
    families = [f.strip() for f in args.families.split(",") if f.strip()]
    bad = [f for f in families if f not in ("werner", "schmidt")]
    if bad or not families:
        raise UsageError(f"unknown families {bad}; choose from werner, schmidt")
    if args.grid < 2:
        raise UsageError("--grid must be at least 2")
    rows = ex.diagram_scan(ch, families, args.grid, include_bound=not args.no_bound)
    if (args.format or "csv") == "csv":
        return rows_to_csv(rows)
    return _json_doc("diagram", seed, channel=ch.name, rows=[row_dict(r) for r in rows])


def _cmd_theorem(args, seed):
    channels = [resolve_channel(args, seed)]
    channels += ex.random_channels(args.random_channels, seed)
    reports = [ex.bound_check(ch, args.samples, seed, pure=args.pure) for ch in channels]
    text = _json_doc("theorem-check", seed, samples=args.samples, pure=args.pure,
                     reports=[r.__dict__ | {"ok": r.ok} for r in reports],
                     violations=sum(r.violations for r in reports))
    return text, [r.require for r in reports]


def _cmd_iso(args, seed):
    ch = resolve_channel(args, seed)
    rep = ex.isoentangled_image_check(ch, args.samples, seed)
    text = _json_doc("iso-check", seed, channel=ch.name, samples=args.samples,
                     choi_concurrence=rep.choi_value, min=float(rep.values.min()),
                     max=float(rep.values.max()), spread=rep.spread, ok=rep.ok)
    return text, [rep.require]


def _cmd_example1(args, seed):
    try:
        pair = ex.epsilon_pair(args.p, args.epsilon)
    except ParamOutOfRange as exc:
        raise UsageError(str(exc)) from exc
    if abs(pair.c1_out - pair.c1_out_closed) > ex.CLOSED_FORM_TOL or \
            abs(pair.c2_out - pair.c2_out_closed) > ex.CLOSED_FORM_TOL:
        raise InvariantViolation(f"epsilon pair deviates from closed forms: {pair}")
    curves = ex.example1_curves(args.p, args.grid) if args.grid else None
    if args.format == "csv":
        if curves is None:
            raise UsageError("example1 --format csv needs --grid")
        return rows_to_csv(curves)
    payload = pair.to_dict()
    if curves is not None:
        payload["curves"] = [row_dict(r) for r in curves]
    return _json_doc("example1", seed, **payload)


def _cmd_example2(args, seed):
    try:
        res = ex.example2_run(args.alpha2)
    except ParamOutOfRange as exc:
        raise UsageError(str(exc)) from exc
    return _json_doc("example2", seed, **res.to_dict())


def _cmd_invert(args, seed):
    ch = resolve_channel(args, seed)
    try:
        w = ex.find_ordering_inversion(ch, args.mode, args.delta, args.samples, seed)
    except ParamOutOfRange as exc:
        raise UsageError(str(exc)) from exc
    return _json_doc("invert-search", seed, channel=ch.name, mode=args.mode, delta=args.delta,
                     witness=None if w is None else w.to_dict())


def _cmd_validate(args, seed):
    ch = resolve_channel(args, seed, default=None)
    payload = {"channel": ch.name, "d_in": ch.d_in, "d_out": ch.d_out,
               "n_kraus": len(ch.kraus), "tp_defect": ch.defect}
    if ch.d_in == 2 and ch.d_out == 2:
        payload["entanglement_breaking"] = is_entanglement_breaking(ch)
        payload["choi_concurrence"] = concurrence(choi(ch).state)
    return _json_doc("validate-channel", seed, **payload)


COMMANDS = {
    "diagram": _cmd_diagram,
    "theorem-check": _cmd_theorem,
    "iso-check": _cmd_iso,
    "example1": _cmd_example1,
    "example2": _cmd_example2,
    "invert-search": _cmd_invert,
    "validate-channel": _cmd_validate,
}


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.format == "csv" and args.command not in ("diagram", "example1"):
            raise UsageError(f"{args.command} emits JSON only")
        seed = args.seed if args.seed is not None else _default_seed()
        result = COMMANDS[args.command](args, seed)
        text, checks = result if isinstance(result, tuple) else (result, [])
        _emit(text, args.out)
        for check in checks:
            check()
    except UsageError as exc:
        print(f"entlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputFileError as exc:
        print(f"entlab: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantViolation as exc:
        print(f"entlab: invariant violated (implementation bug): {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except EntlabError as exc:
        print(f"entlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"entlab: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
