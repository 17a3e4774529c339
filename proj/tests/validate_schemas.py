#!/usr/bin/env python3
"""Run every hf subcommand and validate its JSON output against docs/schemas."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def main():
    hf, schema_dir = sys.argv[1], pathlib.Path(sys.argv[2])
    schemas = {p.stem: json.loads(p.read_text()) for p in schema_dir.glob("*.json")}
    failures = []

    with tempfile.TemporaryDirectory() as tmp:
        d = pathlib.Path(tmp)

        def p(name):
            return str(d / name)

        def run(args, schema, out_file=None):
            proc = subprocess.run([hf, *args], capture_output=True, text=True)
            if proc.returncode == 2:
                failures.append(f"{args[0]}: exit 2: {proc.stderr.strip()}")
                return
            doc = json.loads(pathlib.Path(out_file).read_text() if out_file else proc.stdout)
            check(doc, schema, args[0])

        def check(doc, schema, label):
            try:
                jsonschema.validate(doc, schemas[schema], cls=jsonschema.Draft202012Validator)
            except jsonschema.ValidationError as e:
                failures.append(f"{label} vs {schema}: {e.message} at {list(e.absolute_path)}")

        run(["generate", "--kind", "helicoid", "--r1", "1", "--r2", "8", "--turns", "3", "--n-rho", "40", "--n-theta", "193",
             "--out", p("h.json"), "--mesh-out", p("hm.json")], "generate")
        check(json.loads(pathlib.Path(p("h.json")).read_text()), "multigraph", "graph container")
        check(json.loads(pathlib.Path(p("hm.json")).read_text()), "mesh", "embedded mesh container")
        run(["solve", "--in", p("h.json"), "--bump-amp", "0.05", "--out", p("u.json"), "--report", p("solve.json")], "solve", p("solve.json"))
        check(json.loads(pathlib.Path(p("u.json")).read_text()), "multigraph", "solution container")
        run(["certify", "--in", p("u.json"), "--eps", "0.1", "--N", "2", "--scale", "2"], "certify")
        run(["laurent", "--in", p("u.json"), "--r1", "2", "--radii", "4", "8", "--out", p("laurent.json")], "laurent", p("laurent.json"))
        run(["osc", "--in", p("u.json"), "--rho", "2", "4", "6"], "osc")
        run(["spiral", "--in", p("u.json"), "--C2", "2", "--eps", "0.1"], "spiral")
        run(["gauss", "--in", p("u.json"), "--ray-theta", "10", "--loop-rho", "5"], "gauss")
        run(["report", "--in", p("u.json"), "--out-dir", p("report")], "report")

        run(["generate", "--kind", "helicoid", "--mesh", "--ball", "6", "--n-s", "61", "--n-t", "121", "--out", p("ball.json")], "generate")
        check(json.loads(pathlib.Path(p("ball.json")).read_text()), "mesh", "ball mesh container")
        run(["levels", "--in", p("ball.json"), "--random", "10", "--seed", "3"], "levels")
        run(["blowup", "--in", p("ball.json")], "blowup")
        run(["decompose", "--in", p("ball.json")], "decompose")
        run(["fit", "--in", p("ball.json"), "--out", p("fit.json")], "fit", p("fit.json"))
        run(["bilip", "--in", p("ball.json"), "--model", p("fit.json")], "bilip")
        run(["weierstrass", "--alpha1", "0.25", "--alpha2", "1", "--curve-out", p("curve.json")], "weierstrass")
        check(json.loads(pathlib.Path(p("curve.json")).read_text()), "curve", "curve container")

    for f in failures:
        print("FAIL", f)
    print(f"{len(failures)} schema failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
