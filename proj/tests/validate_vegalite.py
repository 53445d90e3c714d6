import json
import sys

import jsonschema


def main(schema_path, specs_path):
    with open(schema_path) as f:
        schema = json.load(f)
    validator = jsonschema.Draft7Validator(schema)
    count = 0
    with open(specs_path) as f:
        for lineno, line in enumerate(f, 1):
            errors = list(validator.iter_errors(json.loads(line)))
            if errors:
                print(f"line {lineno}: {errors[0].message}")
                return 1
            count += 1
    if count == 0:
        print("no specs to validate")
        return 1
    print(f"{count} specs valid")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1], sys.argv[2]))
