"""Validates plan documents against the published schema."""
import json
import sys

import jsonschema


def main():
    schema_path, *plans = sys.argv[1:]
    with open(schema_path) as f:
        schema = json.load(f)
    validator = jsonschema.Draft202012Validator(schema)
    failed = False
    for path in plans:
        with open(path) as f:
            doc = json.load(f)
        errors = list(validator.iter_errors(doc))
        for e in errors[:5]:
            print(f"{path}: {'/'.join(map(str, e.absolute_path))}: {e.message}")
        if errors:
            failed = True
        else:
            print(f"{path}: valid")
    bad = json.loads(json.dumps(doc))
    bad["tasks"][0]["subprocesses"][2]["type"] = "extrude"
    if validator.is_valid(bad):
        print("schema accepted an unknown subprocess type")
        failed = True
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
