"""Runs the CLI on a generated dataset and validates the report against the JSON schema."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema


def main() -> int:
    mcal, schema_path, config = sys.argv[1:4]
    schema = json.loads(Path(schema_path).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    with tempfile.TemporaryDirectory() as tmp:
        for preset in ("easy", "medium", "hard"):
            data = Path(tmp) / f"{preset}.csv"
            report = Path(tmp) / f"{preset}.json"
            subprocess.run([mcal, "gen-data", "--preset", preset, "--seed", "5", "--out", str(data)], check=True)
            subprocess.run([mcal, "run", "--data", str(data), "--config", config, "--seed", "5",
                            "--out-report", str(report)], check=True, stdout=subprocess.DEVNULL)
            jsonschema.validate(json.loads(report.read_text()), schema,
                                cls=jsonschema.Draft202012Validator)
            print(f"{preset}: report conforms")
    return 0


if __name__ == "__main__":
    sys.exit(main())
