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

"""Spec distributions for the synthetic end-to-end corpora.

Two corpora over gender2 x race5 x age5 cells:

* the audit corpus: 8 models x 7 emotions, 1,000 records per condition. Each
  model concentrates on 8 cells (no indian/latino faces, nobody under 20), is
  tilted towards men or towards white faces, and every emotion moves a little
  mass from young to older faces;
* the shift corpus: 8 models x 7 emotions, 10,000 records per condition, in
  product form. "angry" raises the male share from 0.5 to 0.8 and moves 0.10
  of the age mass from young to 60+.

Seeds are fixed here once and never searched.
"""
import itertools

from naive import AGE5, GENDER2, RACE5, TO_AGE3

CELLS = list(itertools.product(GENDER2, RACE5, AGE5))
EMOTIONS = ["neutral", "happy", "sad", "angry", "surprised", "disgusted", "fearful"]
MODELS = [("syn-a", "western"), ("syn-b", "chinese"), ("syn-c", "western"),
          ("syn-d", "chinese"), ("syn-e", "western"), ("syn-f", "chinese"),
          ("syn-g", "western"), ("syn-h", "chinese")]
BASE_SEED = 1729

AUDIT_BASE = {
    ("male", "white", "20-39"): 0.14, ("female", "white", "40-59"): 0.146,
    ("male", "black", "40-59"): 0.107, ("female", "black", "20-39"): 0.107,
    ("female", "asian", "20-39"): 0.209, ("male", "asian", "40-59"): 0.10,
    ("male", "asian", "60+"): 0.153, ("female", "asian", "60+"): 0.038,
}
AUDIT_WORLD = {
    "gender2": [0.5, 0.5],
    "race4": [0.2, 0.15, 0.35, 0.3],
    "age5": [0.16, 0.16, 0.31, 0.24, 0.13],
}
MODEL_TILT = [0.0, 0.0, 0.01, 0.01, 0.02, 0.02, 0.03, 0.03]
AUDIT_SHIFT = {"neutral": 0.0, "happy": 0.005, "surprised": 0.01, "sad": 0.015,
               "fearful": 0.0175, "disgusted": 0.02, "angry": 0.025}

SHIFT_RACE5 = [0.3, 0.2, 0.25, 0.15, 0.1]
SHIFT_AGE5 = [0.1, 0.15, 0.35, 0.25, 0.15]
# (male share, young -> 60+ mass)
SHIFT_EMOTION = {"neutral": (0.5, 0.0), "happy": (0.55, 0.01), "sad": (0.5, 0.03),
                 "angry": (0.8, 0.10), "surprised": (0.52, 0.02),
                 "disgusted": (0.6, 0.02), "fearful": (0.45, 0.04)}


def seed_for(model_index, emotion_index):
    return BASE_SEED * 1000 + model_index * 10 + emotion_index


def move(v, frm, to, mass):
    """Moves `mass` proportionally from supported cells matching frm to those matching to."""
    v = list(v)
    src = [i for i, c in enumerate(CELLS) if frm(c) and v[i] > 0]
    dst = [i for i, c in enumerate(CELLS) if to(c) and v[i] > 0]
    s_total = sum(v[i] for i in src)
    d_total = sum(v[i] for i in dst)
    src_share = {i: v[i] / s_total for i in src}
    dst_share = {i: v[i] / d_total for i in dst}
    for i in src:
        v[i] -= mass * src_share[i]
    for i in dst:
        v[i] += mass * dst_share[i]
    return v


def audit_specs(model_index):
    base = [AUDIT_BASE.get(c, 0.0) for c in CELLS]
    tilt = MODEL_TILT[model_index]
    if model_index % 2 == 0:
        neutral = move(base, lambda c: c[0] == "female", lambda c: c[0] == "male", tilt)
    else:
        neutral = move(base, lambda c: c[1] != "white", lambda c: c[1] == "white", tilt)
    young = lambda c: TO_AGE3[c[2]] == "young"
    older = lambda c: TO_AGE3[c[2]] != "young"
    return {e: move(neutral, young, older, AUDIT_SHIFT[e]) for e in EMOTIONS}


def shift_specs(model_index):
    del model_index
    out = {}
    for e in EMOTIONS:
        male, mass = SHIFT_EMOTION[e]
        young_total = sum(p for p, a in zip(SHIFT_AGE5, AGE5) if TO_AGE3[a] == "young")
        age = [p - mass * p / young_total if TO_AGE3[a] == "young" else p
               for p, a in zip(SHIFT_AGE5, AGE5)]
        age[AGE5.index("60+")] += mass
        gender = [male, 1.0 - male]
        out[e] = [gender[GENDER2.index(g)] * SHIFT_RACE5[RACE5.index(r)] * age[AGE5.index(a)]
                  for g, r, a in CELLS]
    return out


def corpus(kind):
    specs, n = (audit_specs, 1000) if kind == "audit" else (shift_specs, 10000)
    models = []
    for m, (name, origin) in enumerate(MODELS):
        s = specs(m)
        models.append({
            "name": name,
            "origin": origin,
            "conditions": [{"emotion": e, "seed": seed_for(m, k), "probs": s[e]}
                           for k, e in enumerate(EMOTIONS)],
        })
    out = {"scheme": ["gender2", "race5", "age5"], "records_per_condition": n, "models": models}
    if kind == "audit":
        out["world"] = AUDIT_WORLD
    return out
