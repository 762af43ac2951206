"""Run the acceptance suite and print only the per-criterion lines."""

import subprocess
import sys
from pathlib import Path

root = Path(__file__).resolve().parents[1]
proc = subprocess.run(
    [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", str(root / "tests" / "test_acceptance.py")],
    capture_output=True,
    text=True,
    cwd=root,
)
lines = [ln for ln in proc.stdout.splitlines() if ln.startswith("criterion")]
print("\n".join(lines))
print(f"{sum('PASS' in ln for ln in lines)}/{len(lines)} criteria passed")
sys.exit(proc.returncode)
