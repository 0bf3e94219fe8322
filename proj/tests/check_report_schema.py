"""Validate a freshly analyzed report against docs/report.schema.json."""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema


def main(binary, schema_path):
    schema = json.loads(Path(schema_path).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        subprocess.run([binary, "synth", "--orig", "8", "--mut", "2", "--rec", "2", "--out", str(tmp / "c")],
                       check=True, capture_output=True)
        config = {
            "algorithms": ["ncd_raw", "ncd_tokens", "token_count", {"name": "variance", "base": "ncd_tokens"}],
            "selection": {"op": "nor", "children": [{"atom": "path", "regex": "\\.md$"}]},
            "record_timings": True,
        }
        (tmp / "cfg.json").write_text(json.dumps(config))
        subprocess.run([binary, "analyze", "--root", str(tmp / "c"), "--config", str(tmp / "cfg.json"),
                        "--out", str(tmp / "r.json")], check=True, capture_output=True)
        report = json.loads((tmp / "r.json").read_text())
    jsonschema.validate(report, schema)
    assert {t["name"] for t in report["tests"]} == {"ncd_raw", "ncd_tokens", "token_count", "variance_ncd_tokens"}
    print("report matches schema")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
