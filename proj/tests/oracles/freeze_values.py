"""Independent oracle for the frozen expected values in the C++ tests.

Run with `python3 tests/oracles/freeze_values.py`; the printed numbers are
pasted into the test sources. Nothing here imports or calls the C++ code.
"""
import math
import re
from collections import Counter

import mpmath
import numpy as np

mpmath.mp.dps = 50
MASK = (1 << 64) - 1


def fnv1a(data: bytes, h=14695981039346656037):
    for b in data:
        h ^= b
        h = (h * 1099511628211) & MASK
    return h


def splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK
    return x ^ (x >> 31)


def hash_features(token, seed, dim):
    base = fnv1a(token.lower().encode()) ^ splitmix64(seed)
    return [2.0 * ((splitmix64((base + j) & MASK) >> 11) * 2.0 ** -53) - 1.0 for j in range(dim)]


def log_softmax_mp(xs):
    xs = [mpmath.mpf(x) for x in xs]
    lse = mpmath.log(sum(mpmath.e ** x for x in xs))
    return [x - lse for x in xs]


def combine_mp(pp, pl, pn, a, b, eps, floor=-30):
    lp = [mpmath.log(mpmath.mpf(p)) for p in pp]
    ll = [max(mpmath.log(mpmath.mpf(p)), floor) for p in pl]
    ln = [max(mpmath.log(mpmath.mpf(p)), floor) for p in pn]
    top = max(pp)
    scores = []
    for i in range(len(pp)):
        if pp[i] >= eps * top:
            scores.append((1 + a + b) * lp[i] - a * ll[i] - b * ln[i])
        else:
            scores.append(None)
    live = [s for s in scores if s is not None]
    lse = mpmath.log(sum(mpmath.e ** s for s in live))
    return [s - lse if s is not None else None for s in scores]


def toks(s):
    return re.findall(r"[^\W_]+|[^\w\s]|_", s.lower())


def bleu_stats(cand, refs):
    c = toks(cand)
    rs = [toks(r) for r in refs]
    ref_len = min(rs, key=lambda r: (abs(len(r) - len(c)), len(r)))
    st = {"m": [], "t": [], "c": len(c), "r": len(ref_len)}
    for n in range(1, 5):
        cc = Counter(tuple(c[i:i + n]) for i in range(len(c) - n + 1))
        mx = Counter()
        for r in rs:
            for g, k in Counter(tuple(r[i:i + n]) for i in range(len(r) - n + 1)).items():
                mx[g] = max(mx[g], k)
        st["m"].append(sum(min(k, mx[g]) for g, k in cc.items()))
        st["t"].append(sum(cc.values()))
    return st


def bleu_score(st):
    if st["c"] == 0 or st["m"][0] == 0:
        return 0.0
    logs = []
    for m, t in zip(st["m"], st["t"]):
        if t == 0:
            break
        logs.append(math.log((m if m > 0 else 0.1) / t))
    bp = math.exp(1 - st["r"] / st["c"]) if st["c"] < st["r"] else 1.0
    return 100 * bp * math.exp(sum(logs) / len(logs))


def corpus(outs, refs):
    tot = {"m": [0] * 4, "t": [0] * 4, "c": 0, "r": 0}
    for o, r in zip(outs, refs):
        st = bleu_stats(o, [r])
        for k in range(4):
            tot["m"][k] += st["m"][k]
            tot["t"][k] += st["t"][k]
        tot["c"] += st["c"]
        tot["r"] += st["r"]
    return bleu_score(tot)


def relu(x):
    return np.maximum(x, 0)


def sig(z):
    return 1 / (1 + math.exp(-z))


if __name__ == "__main__":
    print("hash joy/42/4:", [repr(v) for v in hash_features("joy", 42, 4)])
    print("log_softmax(1,2,3):", [mpmath.nstr(v, 30) for v in log_softmax_mp([1, 2, 3])])
    out = combine_mp([0.7, 0.2, 0.1], [0.4, 0.4, 0.2], [0.2, 0.5, 0.3], 1, 1, 0.01)
    print("combine example:", [mpmath.nstr(v, 30) for v in out])
    print("bleu cat:", repr(bleu_score(bleu_stats("the cat sat", ["the cat sat down"]))))
    outs = ["the cat sat on the mat .", "a dog barked loudly", "i love this place !"]
    srcs = ["the cat is on the mat .", "the dog barked", "i hate this place !"]
    refs = ["a cat sat on a mat .", "a dog barked very loudly", "i really love this place !"]
    print("corpus s/r:", repr(corpus(outs, srcs)), repr(corpus(outs, refs)))

    # Two-node gated convolution: nodes 0 <- 1 via "nsubj" (head 0, dependent 1).
    h = np.array([[1.0, -0.5], [0.25, 2.0]])
    W = {"self": np.array([[1.0, 0.5], [-0.5, 1.0]]),
         "nsubj": np.array([[0.2, -0.1], [0.3, 0.4]]),
         "rev:nsubj": np.array([[-0.3, 0.6], [0.1, -0.2]])}
    b = {"self": np.array([0.1, -0.1]), "nsubj": np.array([0.0, 0.2]), "rev:nsubj": np.array([-0.05, 0.05])}
    gw = {"self": np.array([0.5, -0.25]), "nsubj": np.array([-1.0, 0.5]), "rev:nsubj": np.array([0.3, 0.3])}
    gb = {"self": 0.1, "nsubj": -0.2, "rev:nsubj": 0.0}
    # in-edges: node0 <- self(0), rev:nsubj(1); node1 <- self(1), nsubj(0)
    ins = {0: [(0, "self"), (1, "rev:nsubj")], 1: [(1, "self"), (0, "nsubj")]}
    out = np.zeros((2, 2))
    for i in range(2):
        acc = np.zeros(2)
        for j, r in ins[i]:
            g = sig(float(gw[r] @ h[i]) + gb[r])
            acc += g * (W[r] @ h[j] + b[r])
        out[i] = relu(acc)
    print("two-node layer:", [repr(v) for v in out.flatten()])

    # Bigram perplexity: vocab a b c </s>; sentence "a b c </s>".
    start = {"a": 0.5, "b": 0.25, "c": 0.25}
    rows = {"a": {"b": 0.6, "c": 0.4}, "b": {"c": 0.7, "</s>": 0.3}, "c": {"</s>": 0.8, "a": 0.2}}
    p = start["a"] * rows["a"]["b"] * rows["b"]["c"] * rows["c"]["</s>"]
    print("bigram ppl:", repr(p ** (-1 / 4)))

    # The twenty BLEU fixtures shared with the acceptance binary.
    cases = [
        ("the cat sat", ["the cat sat down"]),
        ("the cat sat on the mat", ["the cat sat on the mat"]),
        ("The Cat sat on the mat.", ["the cat sat on a mat ."]),
        ("a dog barked loudly", ["a dog barked very loudly"]),
        ("i love this place !", ["i really love this place !"]),
        ("the the the the the the the", ["the cat is on the mat", "there is a cat on the mat"]),
        ("service was fast and friendly", ["the service was quick and friendly"]),
        ("great food , great people", ["great food and great people", "lovely food , great staff"]),
        ("never again", ["we will never come back again"]),
        ("this hotel is wonderful and the staff are kind", ["this hotel is terrible and the staff are rude"]),
        ("completely unrelated words here", ["the quick brown fox"]),
        ("hello", ["hello"]),
        ("hello world", ["hello there world"]),
        ("it's a fine day, isn't it?", ["it is a fine day , is it not ?"]),
        ("wherefore art thou romeo", ["where are you romeo", "why are you romeo"]),
        ("the food was cold but the wine was warm", ["the food was warm but the wine was cold"]),
        ("one two three four five six seven eight nine ten", ["one two three four five", "six seven eight nine ten eleven"]),
        ("yes yes yes", ["yes"]),
        ("a b c d e f g", ["a b c x e f g"]),
        ("prices are fair and portions generous!", ["prices are fair , portions are generous !"]),
    ]
    for cand, refs in cases:
        print("bleu fixture:", repr(bleu_score(bleu_stats(cand, refs))))
