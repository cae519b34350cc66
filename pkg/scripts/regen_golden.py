"""Regenerate golden instance specs and CLI reports under tests/golden/.

Run after an intentional change to the report format:

    python3 scripts/regen_golden.py
"""

import contextlib
import io
import json
from pathlib import Path

from coeffalg import corpus
from coeffalg.cli import main
from coeffalg.specio import map_to_spec

ROOT = Path(__file__).resolve().parents[1] / "tests" / "golden"
WITNESS_LEVELS = 4


def block_map(assignment):
    return {"kind": "block_map", "assignment": assignment}


def doubling(N, kind):
    return {"name": f"doubling{N}_{kind}", "blocks": [1] * N,
            "endomorphism": {"kind": "doubling", "N": N},
            "transfer": {"kind": "doubling", "N": N, "rho_kind": kind}}


def specs():
    m2c = corpus.m2c_corner()
    out = {
        "identity": {"blocks": [2, 1], "endomorphism": block_map([0, 1]), "transfer": block_map([0, 1])},
        "corner": {"blocks": [1, 1], "endomorphism": block_map([0, None]), "transfer": block_map([0, None])},
        "m2_shift": {"blocks": [2, 2], "endomorphism": block_map([1, None]), "transfer": block_map([None, 0])},
        "cyclic4": {"blocks": [1, 1, 1, 1], "endomorphism": block_map([1, 2, 3, 0]),
                    "transfer": block_map([3, 0, 1, 2])},
        "m2c_corner": {"blocks": [2, 1], "endomorphism": map_to_spec(m2c.delta),
                       "transfer": map_to_spec(m2c.delta_star)},
        "three_block": {"blocks": [1, 1, 1], "endomorphism": block_map([0, 0, 1]),
                        "transfer": map_to_spec(corpus.three_block().delta_star)},
        "zero": {"blocks": [2, 1], "endomorphism": block_map([None, None])},
        "identity_no_transfer": {"blocks": [2, 1], "endomorphism": block_map([0, 1])},
    }
    for name, spec in out.items():
        spec["name"] = name
        spec["seed"] = 0
    for N in (8, 16):
        for kind in ("constant_half", "raised_cosine"):
            spec = doubling(N, kind)
            spec["seed"] = 0
            out[spec["name"]] = spec
    return out


def run(args):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(io.StringIO()):
        code = main(args)
    return code, buf.getvalue()


def main_regen():
    (ROOT / "specs").mkdir(parents=True, exist_ok=True)
    (ROOT / "reports").mkdir(parents=True, exist_ok=True)
    codes = {}
    for name, spec in sorted(specs().items()):
        path = ROOT / "specs" / f"{name}.json"
        path.write_text(json.dumps(spec, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        for command in ("analyze", "witness"):
            args = [command, str(path)] + (["--levels", str(WITNESS_LEVELS)] if command == "witness" else [])
            code, text = run(args)
            (ROOT / "reports" / f"{name}.{command}.json").write_text(text, encoding="utf-8")
            codes[f"{name}.{command}"] = code
    (ROOT / "exit_codes.json").write_text(json.dumps(codes, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    for k, v in sorted(codes.items()):
        print(f"{k}: exit {v}")


if __name__ == "__main__":
    main_regen()
