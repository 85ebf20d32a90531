"""Expected scores for the fixture run, by exhaustive matching.

Writes expected.json. Independent of the Rust scorer.
"""
import json

ENTITIES = {"FOOD", "RESTAURANT", "SERVICE", "AMBIENCE", "DRINKS", "LOCATION"}
ASPECTS = {"QUALITY", "STYLE_OPTIONS", "GENERAL", "PRICES", "MISCELLANEOUS"}
SENTIMENTS = {"positive", "negative", "neutral"}


def clean(v):
    v = v.strip()
    while True:
        w = v.strip("\"'`").strip()
        if w == v:
            return v.replace("\\_", "_")
        v = w


def parse(raw):
    quads = []
    for frag in raw.replace("\n", ",").split(","):
        frag = frag.strip()
        if not frag:
            continue
        parts = frag.rsplit(":", 3)
        if len(parts) < 4:
            continue
        target = clean(parts[0])
        if not target:
            continue
        e, a, s = clean(parts[1]).upper(), clean(parts[2]).upper(), clean(parts[3]).lower()
        if e not in ENTITIES or a not in ASPECTS or s not in SENTIMENTS:
            continue
        q = (None if target == "NULL" else target, e, a, s)
        if q not in quads:
            quads.append(q)
    return quads


def compatible(g, p, mode):
    gt, pt = g[0], p[0]
    if (gt is None) != (pt is None):
        return False
    if gt is not None and gt.strip().lower() != pt.strip().lower():
        return False
    if mode == "tasd":
        return f"{g[1]}#{g[2]}" == f"{p[1]}#{p[2]}" and g[3] == p[3]
    return g[1:] == p[1:]


def best(gold, pred, mode, used=frozenset(), i=0):
    if i == len(gold):
        return 0
    top = best(gold, pred, mode, used, i + 1)
    for j, p in enumerate(pred):
        if j not in used and compatible(gold[i], p, mode):
            top = max(top, 1 + best(gold, pred, mode, used | {j}, i + 1))
    return top


completions = json.load(open("completions.json"))
gold = [json.loads(l) for l in open("gold.jsonl")]
expected = {}
for mode in ["easte", "tasd"]:
    m = g_total = p_total = 0
    per = []
    for s in gold:
        g = [(o["target"], o["entity"], o["aspect"], o["sentiment"]) for o in s["opinions"]]
        p = parse(completions[s["id"]])
        k = best(g, p, mode)
        per.append({"id": s["id"], "gold": len(g), "pred": len(p), "matched": k})
        m, g_total, p_total = m + k, g_total + len(g), p_total + len(p)
    prec, rec = m / p_total, m / g_total
    f1 = 2 * prec * rec / (prec + rec)
    expected[mode] = {
        "matched": m, "gold_total": g_total, "pred_total": p_total,
        "precision": prec, "recall": rec, "f1": f1,
        "summary": f"P={prec*100:.2f} R={rec*100:.2f} F1={f1*100:.2f}",
        "per_sentence": per,
    }
json.dump(expected, open("expected.json", "w"), indent=2)
print({k: v["summary"] for k, v in expected.items()})
