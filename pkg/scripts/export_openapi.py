#!/usr/bin/env python3
"""Regenerate docs/openapi.json from the live FastAPI app."""

import json
from pathlib import Path

from airisk.api import create_app


def main() -> None:
    app = create_app()
    out = Path(__file__).resolve().parent.parent / "docs" / "openapi.json"
    out.parent.mkdir(exist_ok=True)
    out.write_text(json.dumps(app.openapi(), indent=2, sort_keys=True) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
