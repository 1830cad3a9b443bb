"""Regenerates synthetic_weather.csv, a small station-style table for the CSV path."""
import csv
import math
import random

rng = random.Random(20240601)
rows = []
for i in range(400):
    temp = rng.gauss(15.0, 8.0)
    pressure = rng.gauss(1010.0, 9.0)
    humidity = min(100.0, max(5.0, rng.gauss(60.0, 18.0)))
    wind = math.exp(rng.gauss(1.0, 0.5))
    precip = max(0.0, 0.08 * humidity - 0.05 * (pressure - 1010.0) + rng.gauss(0.0, 1.5))
    # Distinct label values keep the nearest-rank count exact.
    precip = round(precip, 3) + i * 1e-6
    rows.append([f"{temp:.3f}", f"{pressure:.2f}", f"{humidity:.2f}", f"{wind:.3f}", f"{precip:.6f}"])

for k in (37, 158, 311):
    rows[k] = [rows[k][0], "NA", "", rows[k][3], ""]

with open("synthetic_weather.csv", "w", newline="") as f:
    w = csv.writer(f)
    w.writerow(["temperature", "pressure", "humidity", "wind_speed", "precipitation"])
    w.writerows(rows)
