#!/usr/bin/env python3
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

"""Monte-Carlo calibration of the synthetic acceptance corpora.

For the audit corpus: how often every sampled KL/JS lands within 0.02 bits
(marginals) or 0.05 bits (24-cell joints) of its spec-level value, per seed,
when each condition has 1,000 records. For the shift corpus: the spread of
mean dP(old | angry) and of the mean male category term across 8 models.
numpy only; independent of the C++ engine.

    python3 tests/oracle/calibrate_acceptance.py [trials]
"""
import os
import sys

import numpy as np

sys.path.insert(0, os.path.dirname(__file__))

import acceptance_design as D  # noqa: E402
import naive  # noqa: E402

CELLS = [{"gender": g, "race": r, "age": a} for g, r, a in D.CELLS]
JOINT = ["gender2", "race4", "age3"]


def projector(scheme):
    if scheme == "joint":
        jc = naive.joint_cells(JOINT)
        idx = [jc.index([naive.label_of(c, s) for s in JOINT]) for c in CELLS]
        k = len(jc)
    else:
        idx = [naive.SCHEMES[scheme].index(naive.label_of(c, scheme)) for c in CELLS]
        k = len(naive.SCHEMES[scheme])
    m = np.zeros((len(CELLS), k))
    m[np.arange(len(CELLS)), idx] = 1.0
    return m


PROJ = {s: projector(s) for s in ["gender2", "race4", "age5", "age3", "joint"]}


def kl(p, q, eps=1e-6):
    if np.any((q == 0) & (p > 0)):
        q = (q + eps) / (1 + len(q) * eps)
    m = p > 0
    return float(np.sum(p[m] * np.log2(p[m] / q[m])))


def js(p, q):
    m = 0.5 * (p + q)
    return 0.5 * kl(p, m) + 0.5 * kl(q, m)


def audit_trial(design, rng):
    n = design["records_per_condition"]
    worst_marginal, worst_joint = 0.0, 0.0
    for model in design["models"]:
        spec = {c["emotion"]: np.array(c["probs"]) for c in model["conditions"]}
        hat = {e: rng.multinomial(n, p / p.sum()) / n for e, p in spec.items()}
        for s in ["gender2", "race4", "age5"]:
            w = np.array(design["world"][s])
            q, qh = spec["neutral"] @ PROJ[s], hat["neutral"] @ PROJ[s]
            worst_marginal = max(worst_marginal, abs(kl(w, qh) - kl(w, q)),
                                 abs(js(w, qh) - js(w, q)))
        for e in spec:
            if e == "neutral":
                continue
            for s in ["gender2", "race4", "age5"]:
                p, q = spec[e] @ PROJ[s], spec["neutral"] @ PROJ[s]
                ph, qh = hat[e] @ PROJ[s], hat["neutral"] @ PROJ[s]
                worst_marginal = max(worst_marginal, abs(kl(ph, qh) - kl(p, q)))
            p, q = spec[e] @ PROJ["joint"], spec["neutral"] @ PROJ["joint"]
            ph, qh = hat[e] @ PROJ["joint"], hat["neutral"] @ PROJ["joint"]
            worst_joint = max(worst_joint, abs(kl(ph, qh) - kl(p, q)), abs(js(ph, qh) - js(p, q)))
    return worst_marginal, worst_joint


def shift_trial(design, rng):
    n = design["records_per_condition"]
    dp_old, male_term = [], []
    for model in design["models"]:
        spec = {c["emotion"]: np.array(c["probs"]) for c in model["conditions"]}
        angry = rng.multinomial(n, spec["angry"] / spec["angry"].sum()) / n
        neutral = rng.multinomial(n, spec["neutral"] / spec["neutral"].sum()) / n
        a3, n3 = angry @ PROJ["age3"], neutral @ PROJ["age3"]
        dp_old.append(a3[2] - n3[2])
        pe, p0 = (angry @ PROJ["gender2"])[0], (neutral @ PROJ["gender2"])[0]
        male_term.append(pe * np.log2(pe / p0))
    return np.mean(dp_old), np.mean(male_term)


def main():
    trials = int(sys.argv[1]) if len(sys.argv) > 1 else 200
    rng = np.random.default_rng(0)

    audit = D.corpus("audit")
    res = np.array([audit_trial(audit, rng) for _ in range(trials)])
    ok = (res[:, 0] <= 0.02) & (res[:, 1] <= 0.05)
    print(f"audit corpus: trials={trials} pass_rate={ok.mean():.3f}")
    print(f"  worst marginal deviation  median={np.median(res[:, 0]):.4f} "
          f"p95={np.quantile(res[:, 0], 0.95):.4f}")
    print(f"  worst joint deviation     median={np.median(res[:, 1]):.4f} "
          f"p95={np.quantile(res[:, 1], 0.95):.4f}")

    shift = D.corpus("shift")
    res = np.array([shift_trial(shift, rng) for _ in range(trials)])
    target = 0.8 * np.log2(0.8 / 0.5)
    print(f"shift corpus: mean dP(old|angry) sd={res[:, 0].std():.4f} "
          f"max|err|={np.abs(res[:, 0] - 0.10).max():.4f}")
    print(f"  mean male term sd={res[:, 1].std():.4f} "
          f"max|err|={np.abs(res[:, 1] - target).max():.4f}")


if __name__ == "__main__":
    main()
