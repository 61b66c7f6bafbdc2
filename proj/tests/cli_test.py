"""End-to-end checks of the sbglsu command line.

Usage: cli_test.py PATH_TO_SBGLSU WORKDIR
"""

import csv
import json
import math
import os
import shutil
import struct
import subprocess
import sys
from pathlib import Path

CLI = str(Path(sys.argv[1]).resolve())
WORK = Path(sys.argv[2]).resolve()
failures = []


def run(*args, env=None, expect=0):
    proc = subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, env=env, cwd=WORK)
    if expect is not None and proc.returncode != expect:
        failures.append(f"{' '.join(map(str, args))}: exit {proc.returncode}, expected {expect}\n{proc.stderr}")
    return proc


def check(cond, msg):
    if not cond:
        failures.append(msg)


def read_matrix(path):
    with open(path) as f:
        return [[float(x) for x in row] for row in csv.reader(f) if row]


def frob2(rows):
    return sum(v * v for row in rows for v in row)


def diff(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def read_cube(stem):
    header = json.loads(Path(str(stem) + ".hdr.json").read_text())
    raw = Path(str(stem) + ".bin").read_bytes()
    n = header["height"] * header["width"] * header["bands"]
    check(len(raw) == 8 * n, "payload length disagrees with header")
    return header, struct.unpack("<%dd" % n, raw)


shutil.rmtree(WORK, ignore_errors=True)
WORK.mkdir(parents=True)

# synth: small scene, then determinism and presets.
run("synth", "--height", 16, "--width", 16, "--m-library", 20, "--m-active", 3, "--bands", 30,
    "--snr", 30, "--seed", 4, "--out", "s")
run("synth", "--height", 16, "--width", 16, "--m-library", 20, "--m-active", 3, "--bands", 30,
    "--snr", 30, "--seed", 4, "--out", "s2")
check((WORK / "s/cube.bin").read_bytes() == (WORK / "s2/cube.bin").read_bytes(), "synth not deterministic")
for name in ["cube.bin", "cube.hdr.json", "truth.csv", "library.csv", "active_ids.csv", "manifest.json"]:
    check((WORK / "s" / name).exists(), f"synth did not write {name}")
manifest = json.loads((WORK / "s/manifest.json").read_text())
for key in ["subcommand", "params", "inputs", "outputs", "seed", "timestamp", "version"]:
    check(key in manifest, f"manifest lacks {key}")
check(manifest["seed"] == 4, "manifest seed")
header, payload = read_cube(WORK / "s/cube")
check(header["dtype"] == "f64le" and header["interleave"] == "bip", "cube header fields")
check(header["metadata"]["generator"].startswith("mt19937_64"), "generator recorded")

for preset, size, active in [("dc1", 75, 5), ("dc2", 100, 9)]:
    run("synth", "--preset", preset, "--m-library", 12, "--bands", 8, "--out", preset)
    h, _ = read_cube(WORK / preset / "cube")
    check(h["height"] == size and h["width"] == size, f"{preset} size")
    with open(WORK / preset / "active_ids.csv") as f:
        check(len(f.read().strip().splitlines()) == active + 1, f"{preset} active count")
    check("caveat" in json.loads((WORK / preset / "manifest.json").read_text())["params"], f"{preset} caveat")

for snr in [20, 40]:
    run("synth", "--height", 6, "--width", 6, "--m-library", 5, "--m-active", 2, "--bands", 7, "--snr", snr,
        "--out", f"snr{snr}")

# Realized SNR recomputed from the files.
truth = read_matrix(WORK / "s/truth.csv")
with open(WORK / "s/library.csv") as f:
    rows = list(csv.reader(f))
lib = [[float(x) for x in r] for r in rows[1:]]
bands, m = len(lib), len(lib[0])
n = len(truth[0])
clean = [[sum(lib[b][k] * truth[k][p] for k in range(m)) for p in range(n)] for b in range(bands)]
noisy = [[payload[p * bands + b] for p in range(n)] for b in range(bands)]
snr = 10 * math.log10(frob2(clean) / frob2(diff(noisy, clean)))
check(abs(snr - 30) < 1e-6, f"realized SNR {snr}")

# segment
proc = run("segment", "--cube", "s/cube.bin", "--size", 8, "--out", "s/labels.csv")
check("superpixels:" in proc.stdout, "segment prints the superpixel count")
check((WORK / "s/labels.manifest.json").exists(), "segment manifest")
proc = run("segment", "--cube", "s/cube.bin", "--size", 17, expect=2)
check("--size" in proc.stderr and "Options" in proc.stderr, "oversized superpixel prints usage")

# unmix + eval, with report fields recomputed here.
run("unmix", "--cube", "s/cube.bin", "--library", "s/library.csv", "--labels", "s/labels.csv",
    "--lambda-s", 0.01, "--lambda-g", 0.1, "--outer", 20, "--truth", "s/truth.csv", "--maps", "0,2", "--out", "u")
for name in ["abundances.csv", "convergence.csv", "maps/endmember_0.pgm", "maps/endmember_2.pgm",
             "maps/endmember_0.csv", "report.csv", "manifest.json"]:
    check((WORK / "u" / name).exists(), f"unmix did not write {name}")
with open(WORK / "u/convergence.csv") as f:
    conv = list(csv.reader(f))
check(conv[0] == ["outer_iter", "objective", "rmse"] and len(conv) == 21, "convergence layout")
check(all(r[2] != "" for r in conv[1:]), "rmse column filled with truth")

est = read_matrix(WORK / "u/abundances.csv")
check(min(min(r) for r in est) >= 0.0, "abundances nonnegative")
proc = run("eval", "--truth", "s/truth.csv", "--est", "u/abundances.csv", "--format", "csv")
report = {(r["metric"], r["endmember"]): r["value"] for r in csv.DictReader(proc.stdout.splitlines())}
err = diff(truth, est)
sre = 10 * math.log10(frob2(truth) / frob2(err))
rmse = math.sqrt(frob2(err) / (len(truth) * n))
check(abs(float(report[("sre_db", "")]) - sre) < 1e-9, "sre recomputed")
check(abs(float(report[("rmse", "")]) - rmse) < 1e-12, "rmse recomputed")
for k in range(len(truth)):
    per = math.sqrt(sum(v * v for v in err[k]) / n)
    check(abs(float(report[("endmember_rmse", str(k))]) - per) < 1e-12, f"endmember {k} rmse")

proc = run("eval", "--truth", "s/truth.csv", "--est", "s/truth.csv", "--format", "json")
first = json.loads(proc.stdout.splitlines()[0])
check(first["sre_db"] == "inf" and first["rmse"] == 0, "identical files give inf and 0")
zeros = WORK / "zeros.csv"
zeros.write_text("\n".join(",".join("0" for _ in range(n)) for _ in truth) + "\n")
proc = run("eval", "--truth", "s/truth.csv", "--est", zeros)
check(abs(float(proc.stdout.splitlines()[1].split(",")[2])) < 1e-12, "zero estimate gives 0 dB")
run("eval", "--truth", "s/truth.csv", "--est", "s/library.csv", expect=1)

# Graph-free baseline, weight presets, and in-line segmentation.
run("unmix", "--cube", "s/cube.bin", "--library", "s/library.csv", "--lambda-s", 0.01, "--lambda-g", 0,
    "--outer", 5, "--out", "base")
check((WORK / "base/labels.csv").exists(), "unmix without --labels segments in line")
run("unmix", "--cube", "s/cube.bin", "--library", "s/library.csv", "--labels", "s/labels.csv",
    "--weights-preset", "dc2-40", "--outer", 2, "--out", "preset")
params = json.loads((WORK / "preset/manifest.json").read_text())["params"]
check(params["lambda_s"] == 2e-2 and params["lambda_g"] == 7e-3, "dc2-40 preset weights")
run("unmix", "--cube", "s/cube.bin", "--library", "s/library.csv", "--outer", 2, expect=2)
run("unmix", "--cube", "s/cube.bin", "--library", "snr20/library.csv", "--lambda-s", 0, "--lambda-g", 0,
    expect=1)

# sweep: one-point grid equals unmix + eval; failed rows are kept; first argmax wins.
(WORK / "one.csv").write_text("0.01,0.1\n")
run("sweep", "--grid", "one.csv", "--cube", "s/cube.bin", "--library", "s/library.csv", "--labels",
    "s/labels.csv", "--truth", "s/truth.csv", "--outer", 20, "--out", "sw1")
with open(WORK / "sw1/sweep.csv") as f:
    row = next(csv.DictReader(f))
check(abs(float(row["sre_db"]) - sre) < 1e-9 and row["best"] == "1", "one-point sweep matches unmix")
(WORK / "grid.csv").write_text("lambda_s,lambda_g\n0.01,0.1\n-1,0\n0.01,0.1\n")
run("sweep", "--grid", "grid.csv", "--cube", "s/cube.bin", "--library", "s/library.csv", "--labels",
    "s/labels.csv", "--truth", "s/truth.csv", "--outer", 20, "--out", "sw")
with open(WORK / "sw/sweep.csv") as f:
    rows = list(csv.DictReader(f))
check([r["status"] for r in rows] == ["ok", "failed", "ok"], "sweep statuses")
check([r["best"] for r in rows] == ["1", "0", "0"], "first argmax marked")
check(set(rows[0]) >= {"lambda_s", "lambda_g", "sre_db", "rmse", "wall_time_s"}, "sweep columns")

# Output root from the environment.
env = dict(os.environ, SBGLSU_OUTPUT_ROOT=str(WORK / "root"))
run("gen-library", "--bands", 5, "--count", 3, env=env)
check((WORK / "root/gen-library/library.csv").exists(), "SBGLSU_OUTPUT_ROOT honoured")

# Usage errors.
run(expect=2)
run("synth", "--snr", "loud", expect=2)
run("synth", "--preset", "dc3", expect=2)
run("unmix", "--cube", "s/cube.bin", expect=2)

if failures:
    print("\n".join(failures))
    sys.exit(1)
print("cli checks passed")
