#!/usr/bin/env python3
# Copyright 2026 The canoe-lab Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates tests/data/calculators.json with 50-digit arithmetic."""
import json
import math
import pathlib

from mpmath import mp, mpf, log, ceil, power

mp.dps = 50

# (n_c, n_q, m, n_terms, n_qubit, norm_1, norm_2, epsilon, delta)
TUPLES = [
    (10, 4, 10, 185, 8, "2.6875", "0.8125", "1.5936e-3", "0.05"),
    (10, 4, 3, 185, 8, "2.6875", "0.8125", "1.5936e-3", "0.05"),
    (1, 1, 1, 1, 1, "1", "1", "1", "0.5"),
    (250, 16, 50, 1200, 12, "17.25", "3.5", "1e-3", "0.01"),
    (5000, 64, 5000, 40000, 20, "120.5", "9.75", "1.5936e-3", "0.001"),
]
# (terms, trotter_steps, krylov_index, delta)
RATE_TUPLES = [
    (1, 1, 1, "0.05"),
    (100000000, 10, 64, "1e-3"),
    (100, 10, 64, "1e-3"),
    (37, 3, 8, "0.25"),
    (1000, 1, 1, "1e-6"),
]


def f(x):
    return float(x)


def main():
    rows = []
    for n_c, n_q, m, n_h, n, h1, h2, eps, delta in TUPLES:
        h1, h2, eps, delta = (mpf(float(v)) for v in (h1, h2, eps, delta))
        b = ceil(mpf(n_c) / m)
        hist = n_q * (1 + 2 * b)
        had = 2 * n_c * n_q * n_h * h2**2 / eps**2
        sha = 68 * n_q * power(3, n) * h1**2 * log(4 * n_c / delta) / eps**2
        his = hist * mpf(9) / 4 * m * h1**2 / eps**2 * log(2 * power(2, n) * hist / delta)
        rows.append({
            "n_c": n_c, "n_q": n_q, "m": m, "n_terms": n_h, "n_qubit": n,
            "norm_1": f(h1), "norm_2": f(h2), "epsilon": f(eps), "delta": f(delta),
            "hadamard": f(had), "shadow": f(sha), "histogram": f(his),
        })
    rates = []
    for terms, r, k, delta in RATE_TUPLES:
        delta = mpf(float(delta))
        d = mpf(terms) * r * k
        p = 1 - power(1 - mpf(delta), 1 / d)
        rates.append({"terms": terms, "trotter_steps": r, "krylov_index": k,
                      "delta": f(mpf(delta)), "gate_depth": f(d), "p_max": f(p)})
    out = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data" / "calculators.json"
    out.write_text(json.dumps({"complexity": rows, "error_rate": rates}, indent=2) + "\n")


if __name__ == "__main__":
    main()
