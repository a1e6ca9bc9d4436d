#!/usr/bin/env python3
"""External objective example: prints the peak water level from a result CSV."""
import csv
import sys

with open(sys.argv[1], newline="") as f:
    reader = csv.DictReader(f)
    level_col = next(c for c in reader.fieldnames if c.endswith(".level"))
    print(max(float(row[level_col]) for row in reader))
