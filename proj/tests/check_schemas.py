"""Validates the fixture files and descriptors printed by nslctl against the
published schemas."""

import json
import pathlib
import shutil
import subprocess
import sys
import tempfile

import jsonschema
from referencing import Registry, Resource


def load(path):
    with open(path) as f:
        return json.load(f)


def main(schemas_dir, fixtures_dir, nslctl):
    schemas = {p.name: load(p) for p in pathlib.Path(schemas_dir).glob("*.schema.json")}
    registry = Registry().with_resources(
        (name, Resource.from_contents(doc)) for name, doc in schemas.items())

    def validator(name):
        return jsonschema.Draft202012Validator(schemas[name], registry=registry)

    failures = 0

    def check(name, doc, label, expect_valid=True):
        nonlocal failures
        errors = list(validator(name).iter_errors(doc))
        if bool(errors) == expect_valid:
            failures += 1
            detail = errors[0].message if errors else "accepted"
            print(f"FAIL {label}: {detail}")
        else:
            print(f"ok   {label}")

    fixtures = pathlib.Path(fixtures_dir)
    check("infra.schema.json", load(fixtures / "infra.json"), "infra.json")
    for part in ("vnfs", "nsds", "templates"):
        check(f"{part}.schema.json", load(fixtures / "catalog" / f"{part}.json"), f"catalog/{part}.json")

    broken = load(fixtures / "infra.json")
    broken["pops"][0]["capacity"]["vcpu"] = -1
    check("infra.schema.json", broken, "negative vcpu is refused", expect_valid=False)

    with tempfile.TemporaryDirectory() as tmp:
        data = pathlib.Path(tmp) / "data"
        shutil.copytree(fixtures, data)

        def run(*args):
            out = subprocess.run([nslctl, "--data-dir", str(data), *args], check=True,
                                 capture_output=True, text=True)
            return out.stdout.strip()

        for template in ("embb", "secure-cdn"):
            order = run("order", "submit", "--tenant", "tenant-a", "--template", template)
            run("order", "process", order)
            check("nsld.schema.json", json.loads(run("slice", "descriptor", order)), f"descriptor of {template}")

    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:4]))
