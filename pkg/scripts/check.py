"""Local CI for cvdyn: compile, unit tests, then the numerical self-checks.

Usage:
    python scripts/check.py [--quick]

--quick skips `cvdyn validate`, which re-runs every propagator check at full
size. Exits non-zero if anything fails, so it also works as a git pre-push hook:
    # .git/hooks/pre-push  (make it executable)
    #!/bin/sh
    exec python scripts/check.py --quick
"""
import os
import subprocess
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def run(label: str, args: list[str]) -> bool:
    print(f"\n=== {label} ===", flush=True)
    result = subprocess.run(args, cwd=ROOT)
    ok = result.returncode == 0
    print(f"--- {label}: {'PASS' if ok else f'FAIL (exit {result.returncode})'} ---", flush=True)
    return ok


def main(argv: list[str]) -> int:
    py = sys.executable
    print(f"Local CI on Python {sys.version.split()[0]}")
    steps = [
        ("Byte-compile", [py, "-m", "compileall", "-q", "app", "run.py"]),
        ("Unit tests", [py, "-m", "unittest", "discover", "-s", "tests"]),
    ]
    with tempfile.TemporaryDirectory(prefix="cvdyn-check-") as out:
        if "--quick" not in argv:
            steps.append(("Self-checks", [py, "run.py", "validate", "--out", out]))
        results = [run(label, args) for label, args in steps]
    if all(results):
        print("\nAll checks passed.")
        return 0
    print("\nChecks FAILED.")
    return 1


if __name__ == "__main__":
    raise SystemExit(main(sys.argv[1:]))
