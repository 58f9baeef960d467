"""Runs every mttlab subcommand with --json and validates the payload against its schema."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def main() -> int:
    tool, schemas, fixtures = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    fx = lambda name: str(fixtures / f"{name}.mtt")
    tmp = pathlib.Path(tempfile.mkdtemp())
    broken = tmp / "broken.mtt"
    broken.write_text("name B\ninput f/2 a/0\noutput a/0\nstates q0/0\ninitial q0\nq0, a -> a\n")
    gadget = tmp / "gadget.mtt"

    runs = [
        ("eval", ["eval", fx("REVDEWEY"), "a(a(e))"], 0),
        ("validate", ["validate", fx("IDENT")], 0),
        ("validate", ["validate", str(broken)], 2),
        ("normalize", ["normalize", fx("IMPROP"), "--trace"], 0),
        ("pout", ["pout", fx("IMPROP"), "--state", "q", "--param", "1", "--la", "p", "--budget", "5"], 0),
        ("pout", ["pout", fx("NEST2"), "--state", "q", "--param", "1", "--la", "p"], 0),
        ("decide", ["decide", "lshi", fx("NEST2")], 0),
        ("decide", ["decide", "lhi", fx("MLNEST")], 0),
        ("decide", ["decide", "lhi", fx("DOUBLE")], 0),
        ("gadget", ["gadget", fx("CONSTB"), fx("CONSTC"), "-o", str(gadget)], 0),
        ("profile", ["profile", "lsoi", str(gadget), "--inputs", "a^N(e)", "--range", "1:6"], 0),
        ("profile", ["profile", "height", fx("NEST2"), "--inputs", "a^N(e)", "--range", "1:6"], 0),
        ("equiv-sample", ["equiv-sample", fx("CONSTB"), fx("CONSTC")], 0),
        ("equiv-sample", ["equiv-sample", fx("IDENT"), fx("IDENT")], 0),
    ]
    failures = 0
    for name, args, code in runs:
        schema = json.loads((schemas / f"{name}.schema.json").read_text())
        proc = subprocess.run([tool, *args, "--json"], capture_output=True, text=True)
        label = " ".join(args[:2])
        if proc.returncode != code:
            print(f"FAIL {label}: exit {proc.returncode}, expected {code}: {proc.stderr.strip()}")
            failures += 1
            continue
        try:
            jsonschema.validate(json.loads(proc.stdout), schema)
            print(f"ok   {label}")
        except (json.JSONDecodeError, jsonschema.ValidationError) as e:
            print(f"FAIL {label}: {e}")
            failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
