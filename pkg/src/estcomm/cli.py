"""Command-line front end.

The CLI never runs protocols itself: it assembles a request, sends it to
the HTTP service (in-process by default, remote with --server), and
renders the response.  Flag values win over config-file values, which win
over defaults.  Exit codes: 0 success, 2 usage or validation problem,
1 internal failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings

from .errors import EstcommError, InputValidationError
from .harness import GENERATORS, TrialRecord, export_csv

DIAG_TARGETS = ("svd", "lambda", "distance-inverse", "discrepancy")

# protocols whose canonical target family is implied by their name
_FAMILY_DEFAULT = {
    "eq": "eq",
    "gt": "gt",
    "abs": "abs_grid",
    "convex": "convex_grid",
    "smooth": "smooth_grid",
}

_INT_KEYS = ("n", "k", "m", "order", "trials", "seed")
_FLOAT_KEYS = ("delta",)
_STR_KEYS = ("protocol", "family", "kind", "generator", "out", "access", "server")


def load_config_file(path: str) -> dict[str, str]:
    """Flat key=value lines; '#' starts a comment; blank lines ignored."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputValidationError(
                    f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _shared_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--protocol", help="protocol id (run/sweep)")
    sp.add_argument("--family", help="target function family")
    sp.add_argument("--n", type=int, help="domain size exponent (size 2^n)")
    sp.add_argument("--k", type=int, help="explicit domain size")
    sp.add_argument("--m", type=int, help="grid cell count (grid families)")
    sp.add_argument("--order", type=int, help="smoothness order (smooth_grid)")
    sp.add_argument("--kind", help="sub-kind for grid families")
    sp.add_argument("--epsilon", action="append", type=float,
                    help="target accuracy; repeat for sweeps")
    sp.add_argument("--delta", type=float, help="failure probability")
    sp.add_argument("--trials", type=int, help="trials per epsilon")
    sp.add_argument("--seed", type=int, help="base seed")
    sp.add_argument("--generator", choices=sorted(GENERATORS),
                    help="instance generator")
    sp.add_argument("--out", help="CSV output path")
    sp.add_argument("--config", help="key=value config file")
    sp.add_argument("--access", choices=["full", "sample"],
                    help="how parties evaluate their own expectations")
    sp.add_argument("--server", help="base URL of a running service "
                    "(default: in-process)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="estcomm",
        description="Two-party estimation protocols with bit-exact "
                    "communication accounting")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("run", "run one protocol over random instances"),
                       ("sweep", "run an epsilon sweep and fit the cost "
                                 "exponent"),
                       ("diag", "spectral and discrepancy diagnostics")):
        sp = sub.add_parser(name, help=text)
        if name == "diag":
            sp.add_argument("target", choices=DIAG_TARGETS)
        _shared_flags(sp)
    return parser


class _Options:
    """Flag values merged over config-file values merged over defaults."""

    def __init__(self, ns: argparse.Namespace):
        file_map = load_config_file(ns.config) if ns.config else {}
        unknown = set(file_map) - set(_INT_KEYS) - set(_FLOAT_KEYS) \
            - set(_STR_KEYS) - {"epsilon"}
        if unknown:
            raise InputValidationError(
                f"unknown config keys: {sorted(unknown)}")
        for key in _INT_KEYS:
            setattr(self, key, self._pick(ns, file_map, key, int))
        for key in _FLOAT_KEYS:
            setattr(self, key, self._pick(ns, file_map, key, float))
        for key in _STR_KEYS:
            setattr(self, key, self._pick(ns, file_map, key, str))
        eps = getattr(ns, "epsilon", None)
        if eps is None and "epsilon" in file_map:
            eps = [float(tok) for tok in file_map["epsilon"].replace(",", " ").split()]
        self.epsilons = sorted(set(eps), reverse=True) if eps else None

    @staticmethod
    def _pick(ns, file_map, key, conv):
        flag = getattr(ns, key, None)
        if flag is not None:
            return flag
        if key in file_map:
            try:
                return conv(file_map[key])
            except ValueError:
                raise InputValidationError(
                    f"config key {key}={file_map[key]!r} is not a valid "
                    f"{conv.__name__}")
        return None

    def family_params(self) -> dict:
        params = {}
        for key in ("n", "k", "m", "order", "kind"):
            value = getattr(self, key)
            if value is not None:
                params[key] = value
        return params


def _client(server: str | None):
    if server:
        import httpx
        return httpx.Client(base_url=server)
    with warnings.catch_warnings():
        # starlette warns about its own httpx-backed test client at import
        warnings.filterwarnings(
            "ignore", message="Using `httpx` with `starlette.testclient`")
        from fastapi.testclient import TestClient
    from .service import create_app
    return TestClient(create_app(), raise_server_exceptions=False)


def _fail(resp) -> int:
    detail = resp.json().get("detail", resp.text)
    print(f"error: {detail}", file=sys.stderr)
    return 2 if resp.status_code == 422 else 1


def _run_body(opts: _Options) -> dict:
    if not opts.protocol:
        raise InputValidationError("--protocol is required")
    if not opts.epsilons:
        raise InputValidationError("--epsilon is required")
    family = opts.family or _FAMILY_DEFAULT.get(opts.protocol)
    if family is None:
        raise InputValidationError(
            f"--family is required for protocol {opts.protocol!r}")
    body = {
        "protocol": opts.protocol,
        "family": family,
        "params": opts.family_params(),
        "epsilons": opts.epsilons,
    }
    if opts.generator is not None:
        body["generator"] = opts.generator
    if opts.trials is not None:
        body["trials"] = opts.trials
    if opts.seed is not None:
        body["seed"] = opts.seed
    if opts.delta is not None:
        body["delta"] = opts.delta
    if opts.access is not None:
        body["access"] = opts.access
    return body


def _records_from(data: dict) -> list[TrialRecord]:
    return [TrialRecord(**row) for row in data["records"]]


def cmd_run(opts: _Options) -> int:
    body = _run_body(opts)
    with _client(opts.server) as client:
        resp = client.post("/run", json=body)
    if resp.status_code != 200:
        return _fail(resp)
    data = resp.json()
    if opts.out:
        export_csv(_records_from(data), opts.out)
    s = data["summary"]
    print(f"protocol={body['protocol']} family={body['family']} "
          f"trials={s['count']} failure_rate={s['failure_rate']:.4f} "
          f"median_bits={s['median_bits']:.0f} max_rounds={s['max_rounds']}")
    return 0


def cmd_sweep(opts: _Options) -> int:
    body = _run_body(opts)
    if len(body["epsilons"]) < 3:
        raise InputValidationError("sweep needs at least 3 distinct epsilons")
    with _client(opts.server) as client:
        resp = client.post("/sweep", json=body)
    if resp.status_code != 200:
        return _fail(resp)
    data = resp.json()
    if opts.out:
        export_csv(_records_from(data), opts.out)
    fit = data["fit"]
    print(f"slope={fit['slope']:.3f} r2={fit['r_squared']:.3f}")
    return 0


def cmd_diag(opts: _Options, target: str) -> int:
    body: dict = {"target": target, "params": opts.family_params()}
    if opts.family is not None:
        body["family"] = opts.family
    if opts.k is not None:
        body["k"] = opts.k
    with _client(opts.server) as client:
        resp = client.post("/diag", json=body)
    if resp.status_code != 200:
        return _fail(resp)
    p = resp.json()["payload"]
    if target == "svd":
        print(f"rank={p['rank']} spectral_norm={p['spectral_norm']:.6g} "
              f"frobenius={p['frobenius']:.6g}")
    elif target == "lambda":
        print("t lam margin")
        for i, (lam, margin) in enumerate(zip(p["lam"], p["margins"]), start=1):
            print(f"{i} {lam:.12g} {margin:.6g}")
    elif target == "distance-inverse":
        print(f"residual={p['residual']:.6g} lambda_k={p['lambda_k']:.6g} "
              f"bound={p['bound']:.6g}")
    else:
        print(f"value={p['value']:.12g} rows={p['witness_rows']} "
              f"cols={p['witness_cols']}")
    return 0


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        opts = _Options(ns)
        if ns.command == "run":
            return cmd_run(opts)
        if ns.command == "sweep":
            return cmd_sweep(opts)
        return cmd_diag(opts, ns.target)
    except (InputValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EstcommError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
