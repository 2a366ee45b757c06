#!/usr/bin/env python3
# Copyright 2026 The llmp Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Plot the synthetic curves as produced by `llmp synth --noise 0`.

usage: plot_synthetic.py <path-to-llmp> <output.png>
"""
import json
import subprocess
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

NAMES = ["linear", "exponential", "sigmoid", "log", "sine", "beat", "linear-cosine",
         "linear-sine", "gaussian-wave", "sinc", "quadratic", "x-sine"]


def curve(llmp, name):
    out = subprocess.run([llmp, "synth", "--function", name, "--noise", "0", "--size", "1",
                          "--targets", "200"], check=True, capture_output=True, text=True).stdout
    rows = [json.loads(line) for line in out.splitlines() if line.strip()]
    pts = sorted((r["x"][0], r["y"]) for r in rows if r.get("split") == "target")
    return [p[0] for p in pts], [p[1] for p in pts]


def main():
    llmp, dest = sys.argv[1], sys.argv[2]
    fig, axes = plt.subplots(3, 4, figsize=(12, 7), sharex=True)
    for ax, name in zip(axes.flat, NAMES):
        xs, ys = curve(llmp, name)
        ax.plot(xs, ys, lw=1.2)
        ax.set_title(name, fontsize=10)
    for ax in axes[-1]:
        ax.set_xlabel("x")
    fig.tight_layout()
    fig.savefig(dest, dpi=90)


if __name__ == "__main__":
    main()
