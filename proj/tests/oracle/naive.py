# Copyright 2026 The biasaudit Authors
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

"""Naive reference implementations used to freeze test goldens.

Pure Python, standard library only, and deliberately unoptimised. Nothing here
imports or shells out to the C++ engine.
"""
import bisect
import json
import math

GENDER2 = ["male", "female"]
RACE5 = ["white", "black", "asian", "indian", "latino"]
RACE4 = ["white", "black", "asian", "others"]
AGE5 = ["0-9", "10-19", "20-39", "40-59", "60+"]
AGE3 = ["young", "middle", "old"]
EMOTION8 = ["neutral", "happy", "sad", "angry", "surprised", "disgusted", "fearful", "unhappy"]

TO_RACE4 = {"white": "white", "black": "black", "asian": "asian",
            "indian": "others", "latino": "others"}
TO_AGE3 = {"0-9": "young", "10-19": "young", "20-39": "young",
           "40-59": "middle", "60+": "old"}

SCHEMES = {"gender2": GENDER2, "race5": RACE5, "race4": RACE4,
           "age5": AGE5, "age3": AGE3}

EPSILON = 1e-6


def label_of(record, scheme):
    if scheme == "gender2":
        return record["gender"]
    if scheme == "race5":
        return record["race"]
    if scheme == "race4":
        return TO_RACE4[record["race"]]
    if scheme == "age5":
        return record["age"]
    if scheme == "age3":
        return TO_AGE3[record["age"]]
    raise KeyError(scheme)


def read_jsonl(path):
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def tally(records, scheme):
    counts = [0] * len(SCHEMES[scheme])
    for r in records:
        counts[SCHEMES[scheme].index(label_of(r, scheme))] += 1
    return counts


def joint_cells(components):
    cells = [[]]
    for name in components:
        cells = [c + [label] for c in cells for label in SCHEMES[name]]
    return cells


def joint_tally(records, components):
    cells = joint_cells(components)
    counts = [0] * len(cells)
    for r in records:
        key = [label_of(r, name) for name in components]
        counts[cells.index(key)] += 1
    return counts


def normalize(counts):
    n = sum(counts)
    return [c / n for c in counts]


def log(x, base):
    return math.log(x) / math.log(2.0) if base == 2 else math.log(x)


def floor_if_needed(p, q):
    if any(qi == 0 and pi > 0 for pi, qi in zip(p, q)):
        k = len(q)
        return [(qi + EPSILON) / (1 + k * EPSILON) for qi in q]
    return list(q)


def kl(p, q, base=2):
    q = floor_if_needed(p, q)
    total = 0.0
    for pi, qi in zip(p, q):
        if pi > 0:
            total += pi * log(pi / qi, base)
    return max(total, 0.0)


def js(p, q, base=2):
    m = [(a + b) / 2 for a, b in zip(p, q)]
    total = 0.0
    for pi, mi in zip(p, m):
        if pi > 0:
            total += 0.5 * pi * log(pi / mi, base)
    for qi, mi in zip(q, m):
        if qi > 0:
            total += 0.5 * qi * log(qi / mi, base)
    return max(total, 0.0)


def tvd(p, q):
    return 0.5 * sum(abs(a - b) for a, b in zip(p, q))


def severity(t):
    if t < 0.1:
        return "minor"
    if t < 0.5:
        return "moderate"
    if t < 0.8:
        return "large"
    return "extreme"


class MT19937_64:
    """Reference MT19937-64 (Matsumoto and Nishimura, 2004)."""

    N, M = 312, 156
    MASK = (1 << 64) - 1

    def __init__(self, seed):
        self.mt = [0] * self.N
        self.mt[0] = seed & self.MASK
        for i in range(1, self.N):
            prev = self.mt[i - 1]
            self.mt[i] = (6364136223846793005 * (prev ^ (prev >> 62)) + i) & self.MASK
        self.index = self.N

    def _twist(self):
        upper, lower = 0xFFFFFFFF80000000, 0x7FFFFFFF
        for i in range(self.N):
            x = (self.mt[i] & upper) | (self.mt[(i + 1) % self.N] & lower)
            xa = x >> 1
            if x & 1:
                xa ^= 0xB5026F5AA96619E9
            self.mt[i] = self.mt[(i + self.M) % self.N] ^ xa
        self.index = 0

    def next(self):
        if self.index >= self.N:
            self._twist()
        x = self.mt[self.index]
        self.index += 1
        x ^= (x >> 29) & 0x5555555555555555
        x ^= (x << 17) & 0x71D67FFFEDA60000
        x ^= (x << 37) & 0xFFF7EEE000000000
        x ^= x >> 43
        return x & self.MASK


def sample_cells(probs, n, seed):
    cumulative, acc = [], 0.0
    for p in probs:
        acc += p
        cumulative.append(acc)
    rng = MT19937_64(seed)
    out = []
    for _ in range(n):
        u = (rng.next() >> 11) * 2.0 ** -53
        i = bisect.bisect_right(cumulative, u)
        if i == len(cumulative):
            i -= 1
            while i > 0 and cumulative[i] == cumulative[i - 1]:
                i -= 1
        out.append(i)
    return out


def fixed(v, digits, sign=False):
    text = f"{v:+.{digits}f}" if sign else f"{v:.{digits}f}"
    if text.strip("+-0.") == "":
        text = f"{0.0:.{digits}f}"
    return text
