"""Batch front end: read a JSON spec document, run one check, emit a JSON report.

Exit codes: 0 every verdict passes, 1 a check failed (witnesses in the
report), 2 parse or validation error, 3 enumeration budget exceeded,
4 internal invariant violation.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field

from . import __version__
from .codec import (
    GROUND_KINDS,
    decode_certificate,
    decode_entourage,
    decode_family,
    decode_point,
    decode_profile,
    decode_window,
    encode_certificate,
    encode_entourage,
    encode_family,
    encode_window,
    parse_window_descriptor,
)
from .coarse import (
    Envelope,
    cert_compose,
    cert_diagonal,
    cert_inverse,
    cert_union,
    envelope,
    envelope_soundness_check,
    properness_check,
    strongly_generates_check,
    verify_certificate,
)
from .counterexamples import defeat_lattice, defeat_product
from .entourages import Diagonal, compose, invert, unite
from .errors import BudgetExceededError, CertificateError, KindMismatchError, SpecError
from .model import DEFAULT_BUDGET, Budget, check_pseudometric_axioms, lattice_family_for
from .reports import CheckReport, InvariantError, jsonable

COMMANDS = ("verify", "axioms", "envelope", "proper", "defeat", "generates")

EXIT_PASS, EXIT_FAIL, EXIT_SPEC, EXIT_BUDGET, EXIT_INTERNAL = 0, 1, 2, 3, 4

_TOP_KEYS = ("format", "command", "ground_set", "family", "window", "entourages", "certificates", "params")
FORMAT = "coarsebound-spec/1"


@dataclass
class SpecDocument:
    ground_set: dict
    family: object = None
    window: object = None
    entourages: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    command: str | None = None


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _decode_ground(value, path="$.ground_set") -> dict:
    if not isinstance(value, dict):
        raise SpecError("expected an object", path)
    kind = value.get("kind")
    if kind not in GROUND_KINDS:
        raise SpecError(f"kind must be one of {list(GROUND_KINDS)}", path + ".kind")
    extra = set(value) - ({"kind", "dimension"} if kind == "vector" else {"kind"})
    if extra:
        raise SpecError(f"unknown field(s) {sorted(extra)}", path)
    if kind == "vector":
        dim = value.get("dimension")
        if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
            raise SpecError("vector ground set needs a dimension >= 1", path + ".dimension")
        return {"kind": kind, "dimension": dim}
    return {"kind": kind}


def _decode_entourages(raw, ground) -> dict:
    if not isinstance(raw, dict):
        raise SpecError("expected an object of named entourages", "$.entourages")
    done, active = {}, []

    def resolve(name, path):
        if not isinstance(name, str) or name not in raw:
            raise SpecError(f"unresolved entourage reference {name!r}", path)
        if name in active:
            raise SpecError(f"cyclic entourage reference through {name!r}", path)
        if name not in done:
            active.append(name)
            done[name] = decode_entourage(raw[name], ground, f"$.entourages.{name}", resolve)
            active.pop()
        return done[name]

    for name in raw:
        resolve(name, f"$.entourages.{name}")
    return {name: done[name] for name in raw}


def _names(value, table, path, kind):
    if not isinstance(value, str) or value not in table:
        raise SpecError(f"unresolved {kind} name {value!r}", path)
    return value


def _pair_refs(items, doc, path):
    if not isinstance(items, list):
        raise SpecError("expected a list", path)
    for i, it in enumerate(items):
        p = f"{path}[{i}]"
        if not isinstance(it, dict) or set(it) != {"entourage", "certificate"}:
            raise SpecError('expected {"entourage": name, "certificate": name}', p)
        _names(it["entourage"], doc.entourages, p + ".entourage", "entourage")
        _names(it["certificate"], doc.certificates, p + ".certificate", "certificate")


def _check_keys(params, allowed, path="$.params"):
    extra = set(params) - set(allowed)
    if extra:
        raise SpecError(f"unknown parameter(s) {sorted(extra)}", path)


def _validate_params(command: str, doc: SpecDocument) -> None:
    P = doc.params
    ground = doc.ground_set["kind"]
    if command == "verify":
        _check_keys(P, ("checks",))
        _pair_refs(P.get("checks", []), doc, "$.params.checks")
    elif command == "axioms":
        _check_keys(P, ("certified",))
        _pair_refs(P.get("certified", []), doc, "$.params.certified")
    elif command == "envelope":
        _check_keys(P, ("certificate",))
        _names(P.get("certificate"), doc.certificates, "$.params.certificate", "certificate")
    elif command == "proper":
        _check_keys(P, ("envelope", "certificate", "bases"))
        if ("envelope" in P) == ("certificate" in P):
            raise SpecError("give exactly one of envelope or certificate", "$.params")
        if "certificate" in P:
            _names(P["certificate"], doc.certificates, "$.params.certificate", "certificate")
        else:
            _decode_envelope(P["envelope"], "$.params.envelope")
        bases = P.get("bases")
        if not isinstance(bases, list):
            raise SpecError("expected a list of base points", "$.params.bases")
        for i, b in enumerate(bases):
            decode_point(b, doc.ground_set, f"$.params.bases[{i}]")
    elif command == "defeat":
        _check_keys(P, ("mode", "candidates", "n", "dimension"))
        mode = P.get("mode")
        if mode == "lattice":
            _pair_refs(P.get("candidates", []), doc, "$.params.candidates")
        elif mode == "product":
            cands = P.get("candidates", [])
            if not isinstance(cands, list):
                raise SpecError("expected a list of certificate names", "$.params.candidates")
            for i, c in enumerate(cands):
                _names(c, doc.certificates, f"$.params.candidates[{i}]", "certificate")
            dim = P.get("dimension")
            if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
                raise SpecError("product defeat needs a dimension >= 1", "$.params.dimension")
        else:
            raise SpecError('mode must be "lattice" or "product"', "$.params.mode")
        n = P.get("n")
        if n is not None and (isinstance(n, bool) or not isinstance(n, int) or n < 0):
            raise SpecError("n must be a nonnegative integer", "$.params.n")
    elif command == "generates":
        _check_keys(P, ("candidates", "probes"))
        cands = P.get("candidates", [])
        if not isinstance(cands, list):
            raise SpecError("expected a list of entourage names", "$.params.candidates")
        for i, c in enumerate(cands):
            _names(c, doc.entourages, f"$.params.candidates[{i}]", "entourage")
        _pair_refs(P.get("probes", []), doc, "$.params.probes")
    needs = {"verify": ("family", "window"), "axioms": ("family", "window"), "envelope": ("window",),
             "proper": ("window",), "generates": ("family", "window")}
    if command == "defeat" and P.get("mode") == "lattice":
        needs["defeat"] = ("window",)
    for what in needs.get(command, ()):
        if getattr(doc, what) is None:
            raise SpecError(f"command {command!r} needs a {what}", "$")
    if command in ("envelope", "proper") or (command == "defeat" and P.get("mode") == "lattice"):
        if ground != "lattice":
            raise SpecError(f"command {command!r} works on the lattice ground set", "$.ground_set.kind")


def _decode_envelope(value, path) -> Envelope:
    if not isinstance(value, dict) or set(value) - {"M", "stripes"}:
        raise SpecError('expected {"M": natural, "stripes": profile}', path)
    M = value.get("M")
    if isinstance(M, bool) or not isinstance(M, int) or M < 1:
        raise SpecError("M must be a natural number >= 1", path + ".M")
    return Envelope(M, decode_profile(value.get("stripes", {}), path + ".stripes"))


def load_spec(data: dict, command: str | None = None) -> SpecDocument:
    """Validate decoded JSON data into a :class:`SpecDocument`."""
    if not isinstance(data, dict):
        raise SpecError("a spec document is a JSON object", "$")
    extra = set(data) - set(_TOP_KEYS)
    if extra:
        raise SpecError(f"unknown top-level field(s) {sorted(extra)}", "$")
    if data.get("format", FORMAT) != FORMAT:
        raise SpecError(f"unsupported format {data.get('format')!r}", "$.format")
    if "ground_set" not in data:
        raise SpecError("missing ground_set", "$")
    doc_cmd = data.get("command")
    if doc_cmd is not None and doc_cmd not in COMMANDS:
        raise SpecError(f"unknown command {doc_cmd!r}", "$.command")
    if command is not None and doc_cmd is not None and command != doc_cmd:
        raise SpecError(f"spec is for command {doc_cmd!r}, not {command!r}", "$.command")
    ground = _decode_ground(data["ground_set"])
    family = decode_family(data["family"], "$.family") if data.get("family") is not None else None
    window = decode_window(data["window"], ground, "$.window") if data.get("window") is not None else None
    entourages = _decode_entourages(data.get("entourages", {}), ground)
    certs_raw = data.get("certificates", {})
    if not isinstance(certs_raw, dict):
        raise SpecError("expected an object of named certificates", "$.certificates")
    certificates = {k: decode_certificate(v, f"$.certificates.{k}") for k, v in certs_raw.items()}
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise SpecError("expected an object", "$.params")
    doc = SpecDocument(ground, family, window, entourages, certificates, params, doc_cmd)
    effective = command or doc_cmd
    if effective is not None:
        _validate_params(effective, doc)
    return doc


def parse_spec(text: str, command: str | None = None) -> SpecDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}, column {exc.colno}") from None
    return load_spec(data, command)


def dump_spec(doc: SpecDocument) -> dict:
    out = {"format": FORMAT, "ground_set": dict(doc.ground_set)}
    if doc.command is not None:
        out["command"] = doc.command
    if doc.family is not None:
        out["family"] = encode_family(doc.family)
    if doc.window is not None:
        out["window"] = encode_window(doc.window)
    out["entourages"] = {k: encode_entourage(E) for k, E in doc.entourages.items()}
    out["certificates"] = {k: encode_certificate(c) for k, c in doc.certificates.items()}
    out["params"] = doc.params
    return out


def serialize_spec(doc: SpecDocument) -> str:
    return json.dumps(dump_spec(doc), indent=2, sort_keys=True) + "\n"


def spec_hash(doc: SpecDocument) -> str:
    canonical = json.dumps(dump_spec(doc), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _report(command, doc, budget, results, passed) -> dict:
    return {
        "tool": f"coarsebound {__version__}",
        "command": command,
        "params": doc.params,
        "spec_sha256": spec_hash(doc),
        "window": None if doc.window is None else encode_window(doc.window),
        "verdict": "pass" if passed else "fail",
        "results": results,
        "budget": {"limit": budget.limit, "used": budget.used},
    }


def _pairs(doc, items):
    return [(it["entourage"], doc.entourages[it["entourage"]], it["certificate"], doc.certificates[it["certificate"]])
            for it in items]


def cmd_verify(doc: SpecDocument, budget: Budget | None = None) -> dict:
    budget = budget or Budget()
    results, ok = [], True
    for ename, E, cname, c in _pairs(doc, doc.params.get("checks", [])):
        rep = verify_certificate(E, c, doc.family, doc.window, budget)
        ok &= rep.passed
        results.append({"entourage": ename, "certificate": cname, "report": rep.to_dict()})
    return _report("verify", doc, budget, results, ok)


def cmd_axioms(doc: SpecDocument, budget: Budget | None = None) -> dict:
    budget = budget or Budget()
    results, ok = [], True
    for d in doc.family:
        rep = check_pseudometric_axioms(d, doc.window, budget)
        ok &= rep.passed
        results.append({"suite": "pseudometric", "metric": repr(d), "report": rep.to_dict()})

    certified = _pairs(doc, doc.params.get("certified", []))
    for ename, E, cname, c in certified:
        rep = verify_certificate(E, c, doc.family, doc.window, budget)
        ok &= rep.passed
        results.append({"suite": "closure", "operation": "member", "operands": [ename], "report": rep.to_dict()})
    rep = verify_certificate(Diagonal(), cert_diagonal(), doc.family, doc.window, budget)
    ok &= rep.passed
    results.append({"suite": "closure", "operation": "diagonal", "operands": [], "report": rep.to_dict()})
    for ename, E, _, c in certified:
        rep = verify_certificate(invert(E), cert_inverse(c), doc.family, doc.window, budget)
        ok &= rep.passed
        results.append({"suite": "closure", "operation": "inverse", "operands": [ename], "report": rep.to_dict()})
    for e1, E1, _, c1 in certified:
        for e2, E2, _, c2 in certified:
            for op, node, cert in (("union", unite([E1, E2]), cert_union(c1, c2)),
                                   ("compose", compose(E1, E2), cert_compose(c1, c2))):
                rep = verify_certificate(node, cert, doc.family, doc.window, budget)
                ok &= rep.passed
                results.append({"suite": "closure", "operation": op, "operands": [e1, e2], "report": rep.to_dict()})
    return _report("axioms", doc, budget, results, ok)


def cmd_envelope(doc: SpecDocument, budget: Budget | None = None) -> dict:
    budget = budget or Budget()
    cert = doc.certificates[doc.params["certificate"]]
    try:
        env = envelope(cert)
    except ValueError as exc:
        raise SpecError(str(exc), "$.params.certificate") from None
    rep = envelope_soundness_check(cert, doc.window, budget)
    results = [{"certificate": doc.params["certificate"], "envelope": env.to_dict(), "report": rep.to_dict()}]
    return _report("envelope", doc, budget, results, rep.passed)


def cmd_proper(doc: SpecDocument, budget: Budget | None = None) -> dict:
    budget = budget or Budget()
    P = doc.params
    if "certificate" in P:
        try:
            env = envelope(doc.certificates[P["certificate"]])
        except ValueError as exc:
            raise SpecError(str(exc), "$.params.certificate") from None
    else:
        env = _decode_envelope(P["envelope"], "$.params.envelope")
    results, ok = [], True
    for i, b in enumerate(P["bases"]):
        base = decode_point(b, doc.ground_set, f"$.params.bases[{i}]")
        rep = properness_check(env, base, doc.window, budget)
        ok &= rep.passed
        results.append({"base": jsonable(base), "envelope": env.to_dict(), "report": rep.to_dict()})
    return _report("proper", doc, budget, results, ok)


def _certificate_failure(exc: CertificateError) -> dict:
    out = {"error": str(exc)}
    if exc.report is not None:
        out["report"] = exc.report.to_dict()
    return out


def cmd_defeat(doc: SpecDocument, budget: Budget | None = None) -> dict:
    budget = budget or Budget()
    P = doc.params
    try:
        if P["mode"] == "lattice":
            cands = [(E, c) for _, E, _, c in _pairs(doc, P.get("candidates", []))]
            rep = defeat_lattice(cands, doc.window, P.get("n"), budget)
        else:
            cands = [doc.certificates[name] for name in P.get("candidates", [])]
            rep = defeat_product(cands, P["dimension"], P.get("n"))
    except CertificateError as exc:
        return _report("defeat", doc, budget, [_certificate_failure(exc)], False)
    except ValueError as exc:
        raise SpecError(str(exc), "$.params") from None
    return _report("defeat", doc, budget, [rep.to_dict()], rep.passed)


def cmd_generates(doc: SpecDocument, budget: Budget | None = None) -> dict:
    budget = budget or Budget()
    P = doc.params
    cands = [doc.entourages[name] for name in P.get("candidates", [])]
    probes = [(E, c) for _, E, _, c in _pairs(doc, P.get("probes", []))]
    try:
        rep = strongly_generates_check(cands, probes, doc.family, doc.window, budget)
    except CertificateError as exc:
        return _report("generates", doc, budget, [_certificate_failure(exc)], False)
    return _report("generates", doc, budget, [{"report": rep.to_dict()}], rep.passed)


HANDLERS = {
    "verify": cmd_verify,
    "axioms": cmd_axioms,
    "envelope": cmd_envelope,
    "proper": cmd_proper,
    "defeat": cmd_defeat,
    "generates": cmd_generates,
}


def run(command: str, text: str, budget: int = DEFAULT_BUDGET, window_override: str | None = None) -> tuple[int, dict]:
    """Parse, run and return ``(exit_code, report)``; never raises library errors."""
    try:
        doc = parse_spec(text, command)
        if window_override is not None:
            doc.window = parse_window_descriptor(window_override, doc.ground_set)
            _validate_params(command, doc)
        report = HANDLERS[command](doc, Budget(budget))
    except SpecError as exc:
        return EXIT_SPEC, {"command": command, "verdict": "error", "error": "spec", "location": exc.location,
                           "message": str(exc)}
    except KindMismatchError as exc:
        return EXIT_SPEC, {"command": command, "verdict": "error", "error": "kind-mismatch", "message": str(exc)}
    except BudgetExceededError as exc:
        return EXIT_BUDGET, {"command": command, "verdict": "error", "error": "budget", "message": str(exc),
                             "budget": {"limit": exc.limit, "used": exc.used, "requested": exc.requested}}
    except InvariantError as exc:
        return EXIT_INTERNAL, {"command": command, "verdict": "error", "error": "invariant", "message": str(exc)}
    return (EXIT_PASS if report["verdict"] == "pass" else EXIT_FAIL), report


def render(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coarsebound", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--spec", required=True, help="path to the JSON spec document")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="pair-evaluation budget (default 10^7)")
        p.add_argument("--window-override", help='window descriptor: "AxB" or a JSON window object')
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.spec, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        code, report = EXIT_SPEC, {"command": args.command, "verdict": "error", "error": "io", "message": str(exc)}
    else:
        code, report = run(args.command, text, args.budget, args.window_override)
    out = render(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    if code == EXIT_SPEC:
        print(f"coarsebound: {report.get('message')}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
