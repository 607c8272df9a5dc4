"""Command line entry point.

Exit codes: 0 on success, 1 on domain errors (including invalid input
files and failed validation), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import brunnian, cluster, correlations, states, transfer
from .core import ElementId, Hyperstructure, decode_value, encode_value
from .errors import FormatError, HyperstructureError


def export_dot(h: Hyperstructure) -> str:
    """DOT text with one node per element and one edge per boundary membership."""

    def node(e: ElementId) -> str:
        name = f"{e.level}:{e.label}".replace("\\", "\\\\").replace('"', '\\"')
        return f'"{name}"'

    def text(s: str) -> str:
        return s.replace("\\", "\\\\").replace('"', '\\"')

    lines = ["digraph hyperstructure {"]
    elements = h.elements()
    if elements:
        lines.append("  rankdir=BT;")
    for k in range(h.order + 1):
        level = [e for e in elements if e.level == k]
        if not level:
            continue
        lines.append(f"  subgraph level_{k} {{")
        lines.append("    rank=same;")
        for e in level:
            lines.append(f'    {node(e)} [label="{text(e.label)}"];')
        lines.append("  }")
    for b in sorted(h.bonds, key=lambda b: b.id):
        for m in sorted(b.boundary):
            lines.append(f"  {node(b.id)} -> {node(m)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("-o", "--output", help="write the result here instead of stdout")

    p = _Parser(prog="hyperstructures", description="Build and query multilevel bond structures.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", parents=[common], help="check a hyperstructure file")
    s.add_argument("file")
    s.add_argument("--strict", action="store_true", help="also forbid duplicate (boundary, state) bonds")

    s = sub.add_parser("cluster", parents=[common], help="cluster membership queries")
    s.add_argument("file")
    s.add_argument("--element", help="base element to test")
    s.add_argument("--chain", help="comma-separated bond labels, level 1 upwards")
    s.add_argument("--members", metavar="BOND", help="print the cluster of one bond")
    s.add_argument("--level", type=int)

    s = sub.add_parser("support", parents=[common], help="base elements bound by a bond")
    s.add_argument("file")
    s.add_argument("bond")
    s.add_argument("--level", type=int)

    s = sub.add_parser("decompose", parents=[common, out], help="unfold a bond into a tree")
    s.add_argument("file")
    s.add_argument("bond")
    s.add_argument("--level", type=int)

    s = sub.add_parser("resynthesize", parents=[common, out], help="rebuild a structure from trees")
    s.add_argument("trees", help="a tree document or a list of them")

    s = sub.add_parser("generate", parents=[common, out], help="generate a pattern")
    s.add_argument("kind", choices=["brunnian"])
    s.add_argument("signature", help="branching numbers, e.g. 3,3")

    s = sub.add_parser("from-chain", parents=[common, out], help="structure from a composition chain")
    s.add_argument("chain")

    s = sub.add_parser("pullback", parents=[common, out], help="transfer along a representation")
    s.add_argument("representation")

    s = sub.add_parser("remove", parents=[common, out], help="remove an element and cascade")
    s.add_argument("file")
    s.add_argument("element")
    s.add_argument("--level", type=int)

    s = sub.add_parser("propagate", parents=[common], help="propagate base states upwards")
    s.add_argument("file")
    s.add_argument("states")
    s.add_argument("--update", nargs="+", metavar="ELEM=VALUE", default=[])

    s = sub.add_parser("corr", parents=[common], help="Brunnian correlation tests on CSV data")
    s.add_argument("csv")
    s.add_argument("--triple", help="three column names A,B,C")
    s.add_argument("--second-order", help="nine column names, three per group")
    s.add_argument("--epsilon", type=float, default=correlations.DEFAULT_EPSILON)
    s.add_argument("--tau", type=float, default=correlations.DEFAULT_TAU)

    s = sub.add_parser("export-dot", parents=[common, out], help="Graphviz DOT export")
    s.add_argument("file")
    return p


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _labels(elements) -> list:
    return [e.label for e in sorted(elements)]


def _read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON in {path}: {exc}") from exc


def _bond(h: Hyperstructure, label: str, level: Optional[int]) -> ElementId:
    return h.find(label, level)


def _cmd_validate(args) -> int:
    h = Hyperstructure.load(args.file, check=False)
    report = h.validate(strict=True if args.strict else None)
    if args.json:
        print(_dump({"count": len(report), "violations": [vars(v) for v in report]}), end="")
    else:
        for v in report:
            print(v)
        print(f"{len(report)} violations")
    return 1 if report else 0


def _cmd_cluster(args) -> int:
    h = Hyperstructure.load(args.file)
    if args.members:
        result = _labels(cluster.members(h, _bond(h, args.members, args.level)))
        print(_dump(result) if args.json else "\n".join(result))
        return 0
    if not (args.element and args.chain):
        raise _Usage("cluster needs --members, or both --element and --chain")
    answer = cluster.in_cluster_chain(h, args.element, args.chain.split(","))
    print(_dump(answer) if args.json else str(answer).lower())
    return 0


def _cmd_support(args) -> int:
    h = Hyperstructure.load(args.file)
    result = _labels(cluster.support(h, _bond(h, args.bond, args.level)))
    print(_dump(result) if args.json else "\n".join(result))
    return 0


def _cmd_decompose(args) -> int:
    h = Hyperstructure.load(args.file)
    tree = cluster.decompose(h, _bond(h, args.bond, args.level))
    _emit(_dump(tree.to_dict()), args.output)
    return 0


def _cmd_resynthesize(args) -> int:
    data = _read_json(args.trees)
    docs = data if isinstance(data, list) else [data]
    h = cluster.resynthesize(cluster.DecompositionTree.from_dict(d) for d in docs)
    _emit(h.dumps(), args.output)
    return 0


def _cmd_generate(args) -> int:
    sig = brunnian.parse_signature(args.signature)
    if any(n < 3 for n in sig):
        print("warning: Brunnian rings need at least 3 components per bond", file=sys.stderr)
    _emit(brunnian.generate_brunnian(sig).dumps(), args.output)
    return 0


def _cmd_from_chain(args) -> int:
    chain = transfer.CompositionChain.load(args.chain)
    h = transfer.from_composition(chain)
    for space, label in chain.skipped():
        print(f"skipped: {label} (space {space}, empty preimage)", file=sys.stderr)
    _emit(h.dumps(), args.output)
    return 0


def _cmd_pullback(args) -> int:
    h, rep = transfer.load_representation(args.representation)
    _emit(transfer.pullback(h, rep).dumps(), args.output)
    return 0


def _cmd_remove(args) -> int:
    h = Hyperstructure.load(args.file)
    _emit(brunnian.remove_element(h, h.find(args.element, args.level)).dumps(), args.output)
    return 0


def _parse_update(item: str):
    if "=" not in item:
        raise _Usage(f"--update expects ELEM=VALUE, got {item!r}")
    label, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return label, decode_value(value)


def _cmd_propagate(args) -> int:
    h = Hyperstructure.load(args.file)
    spaces, aggs, base = states.load_states(_read_json(args.states))
    changes = dict(_parse_update(u) for u in args.update)
    result = states.propagate(h, spaces, aggs, base)
    diff = {}
    if changes:
        updated = states.update(h, result, aggs, changes)
        diff = result.diff(updated)
        result = updated
    if args.json:
        doc = result.to_dict()
        if changes:
            doc["diff"] = [
                {"level": e.level, "id": e.label, "before": encode_value(a), "after": encode_value(b)}
                for e, (a, b) in diff.items()
            ]
        print(_dump(doc), end="")
    else:
        for e, v in sorted(result.values.items()):
            print(f"{e.level}\t{e.label}\t{v}")
        if changes:
            print(f"# {len(diff)} changed")
            for e, (a, b) in diff.items():
                print(f"{e.level}\t{e.label}\t{a} -> {b}")
    return 0


def _columns(data: dict, names_arg: str, n: int) -> list:
    names = names_arg.split(",")
    if len(names) != n:
        raise _Usage(f"expected {n} column names, got {len(names)}")
    missing = [c for c in names if c not in data]
    if missing:
        raise FormatError(f"unknown column(s): {', '.join(missing)}")
    return names


def _cmd_corr(args) -> int:
    if not (args.triple or args.second_order):
        raise _Usage("corr needs --triple and/or --second-order")
    data = correlations.read_csv(args.csv)
    doc = {}
    if args.triple:
        names = _columns(data, args.triple, 3)
        doc["first_order"] = correlations.brunnian_test(
            *(data[c] for c in names), epsilon=args.epsilon, tau=args.tau, names=names
        ).to_dict()
    if args.second_order:
        names = _columns(data, args.second_order, 9)
        groups = [[data[c] for c in names[i : i + 3]] for i in (0, 3, 6)]
        doc["second_order"] = correlations.second_order_test(
            groups, epsilon=args.epsilon, tau=args.tau
        ).to_dict()
    print(_dump(doc), end="")
    return 0


def _cmd_export_dot(args) -> int:
    _emit(export_dot(Hyperstructure.load(args.file)), args.output)
    return 0


class _Usage(Exception):
    pass


COMMANDS = {
    "validate": _cmd_validate,
    "cluster": _cmd_cluster,
    "support": _cmd_support,
    "decompose": _cmd_decompose,
    "resynthesize": _cmd_resynthesize,
    "generate": _cmd_generate,
    "from-chain": _cmd_from_chain,
    "pullback": _cmd_pullback,
    "remove": _cmd_remove,
    "propagate": _cmd_propagate,
    "corr": _cmd_corr,
    "export-dot": _cmd_export_dot,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except HyperstructureError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
