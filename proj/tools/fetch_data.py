#!/usr/bin/env python3
"""Populate a wfair data directory with the raw UCI benchmark files.

Layout written under the target directory:

    adult/adult.data  adult/adult.test
    german/german.data
    bank/bank-additional-full.csv
    crime/communities.data

Files are fetched from the UCI archive first. If the archive is unreachable,
Adult and German are recovered from the `responsibly` wheel on PyPI, which
ships the unmodified UCI files. Bank and Crime have no such fallback; place
them manually if the archive cannot be reached.
"""

import argparse
import glob
import os
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

SOURCES = {
    "adult/adult.data": f"{UCI}/adult/adult.data",
    "adult/adult.test": f"{UCI}/adult/adult.test",
    "german/german.data": f"{UCI}/statlog/german/german.data",
    "crime/communities.data": f"{UCI}/communities/communities.data",
}
BANK_ZIP = f"{UCI}/00222/bank-additional.zip"

WHEEL_MEMBERS = {
    "adult/adult.data": "responsibly/dataset/adult/adult.data",
    "adult/adult.test": "responsibly/dataset/adult/adult.test",
    "german/german.data": "responsibly/dataset/german/german.data",
}


def fetch_url(url, dest, timeout=30):
    try:
        with urllib.request.urlopen(url, timeout=timeout) as r:
            data = r.read()
    except Exception as e:  # noqa: BLE001
        print(f"  unreachable: {url} ({e})")
        return False
    os.makedirs(os.path.dirname(dest), exist_ok=True)
    with open(dest, "wb") as f:
        f.write(data)
    return True


def fetch_bank(dest):
    with tempfile.TemporaryDirectory() as tmp:
        z = os.path.join(tmp, "bank.zip")
        if not fetch_url(BANK_ZIP, z):
            return False
        with zipfile.ZipFile(z) as zf:
            member = next(n for n in zf.namelist() if n.endswith("bank-additional-full.csv"))
            os.makedirs(os.path.dirname(dest), exist_ok=True)
            with open(dest, "wb") as f:
                f.write(zf.read(member))
    return True


def fetch_from_wheel(missing, root):
    with tempfile.TemporaryDirectory() as tmp:
        cmd = [sys.executable, "-m", "pip", "download", "--no-deps", "-d", tmp, "responsibly==0.1.2"]
        if subprocess.call(cmd, stdout=subprocess.DEVNULL) != 0:
            print("  pip download of responsibly failed")
            return
        wheel = glob.glob(os.path.join(tmp, "*.whl"))[0]
        with zipfile.ZipFile(wheel) as zf:
            for rel in missing:
                dest = os.path.join(root, rel)
                os.makedirs(os.path.dirname(dest), exist_ok=True)
                with open(dest, "wb") as f:
                    f.write(zf.read(WHEEL_MEMBERS[rel]))
                print(f"  {rel} <- responsibly wheel")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--data-dir", default=os.environ.get("WFAIR_DATA_DIR", "data"))
    p.add_argument("--offline-only", action="store_true", help="skip the UCI archive")
    args = p.parse_args()
    root = args.data_dir

    missing = []
    for rel, url in SOURCES.items():
        dest = os.path.join(root, rel)
        if os.path.exists(dest):
            print(f"  {rel} present")
            continue
        if args.offline_only or not fetch_url(url, dest):
            missing.append(rel)
    bank = os.path.join(root, "bank/bank-additional-full.csv")
    if not os.path.exists(bank) and (args.offline_only or not fetch_bank(bank)):
        missing.append("bank/bank-additional-full.csv")

    recoverable = [m for m in missing if m in WHEEL_MEMBERS]
    if recoverable:
        fetch_from_wheel(recoverable, root)
    for m in missing:
        if m not in WHEEL_MEMBERS:
            print(f"  {m} unavailable; place it manually")
    return 0


if __name__ == "__main__":
    sys.exit(main())
