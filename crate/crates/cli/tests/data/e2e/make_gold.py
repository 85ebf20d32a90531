"""Writes gold.jsonl for the end-to-end fixture run."""
import json

SENTENCES = [
    ("e01", "The sushi was fresh and the staff were friendly.",
     [("sushi", "FOOD", "QUALITY", "positive"), ("staff", "SERVICE", "GENERAL", "positive")]),
    ("e02", "Prices are way too high for what you get.",
     [(None, "RESTAURANT", "PRICES", "negative")]),
    ("e03", "Our waiter forgot the drinks twice.",
     [("waiter", "SERVICE", "GENERAL", "negative")]),
    ("e04", "Lovely patio with a view of the river.",
     [("patio", "AMBIENCE", "GENERAL", "positive"), ("view", "LOCATION", "GENERAL", "positive")]),
    ("e05", "The wine list is short but well chosen.",
     [("wine list", "DRINKS", "STYLE_OPTIONS", "positive")]),
    ("e06", "Decent burger, nothing special.",
     [("burger", "FOOD", "QUALITY", "neutral")]),
    ("e07", "We will definitely come back!",
     [(None, "RESTAURANT", "GENERAL", "positive")]),
    ("e08", "The dessert menu offers few choices and the coffee was bitter.",
     [("dessert menu", "FOOD", "STYLE_OPTIONS", "negative"), ("coffee", "DRINKS", "QUALITY", "negative")]),
    ("e09", "Noisy room, slow service, overpriced pasta.",
     [("room", "AMBIENCE", "GENERAL", "negative"), ("service", "SERVICE", "GENERAL", "negative"),
      ("pasta", "FOOD", "PRICES", "negative")]),
    ("e10", "The manager comped our appetizer after the mix-up.",
     [("manager", "SERVICE", "GENERAL", "positive")]),
]

with open("gold.jsonl", "w") as f:
    for sid, text, ops in SENTENCES:
        opinions = []
        for target, e, a, s in ops:
            if target is None:
                opinions.append({"target": None, "from": None, "to": None, "entity": e, "aspect": a, "sentiment": s})
            else:
                start = text.index(target)
                opinions.append({"target": target, "from": start, "to": start + len(target),
                                 "entity": e, "aspect": a, "sentiment": s})
        f.write(json.dumps({"id": sid, "text": text, "opinions": opinions}) + "\n")
