# SPDX-License-Identifier: Apache-2.0
"""Validates every shipped config against schemas/galbrun_config.schema.json."""
import json
import pathlib
import sys

import jsonschema

root = pathlib.Path(sys.argv[1])
schema = json.loads((root / "schemas" / "galbrun_config.schema.json").read_text())
jsonschema.Draft202012Validator.check_schema(schema)
validator = jsonschema.Draft202012Validator(schema)
configs = sorted((root / "tools" / "configs").glob("*.json"))
if not configs:
    sys.exit("no configs found")
failed = 0
for path in configs:
    errors = list(validator.iter_errors(json.loads(path.read_text())))
    for e in errors:
        print(f"{path.name}: {e.json_path}: {e.message}")
    failed += bool(errors)
    print(("ok   " if not errors else "FAIL ") + path.name)
# A config missing a required profile must be rejected.
broken = json.loads(configs[0].read_text())
del broken["model"]["profiles"]["cs"]
if validator.is_valid(broken):
    print("FAIL schema accepts a model without cs")
    failed += 1
sys.exit(1 if failed else 0)
