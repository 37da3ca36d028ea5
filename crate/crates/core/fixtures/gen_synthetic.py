#!/usr/bin/env python3
"""Generate the synthetic corpus fixture and its expected ground truth.

The expected ground truth is computed by a direct scan over every
(researcher, publication) pair, independent of the Rust implementation.
Run from this directory: python3 gen_synthetic.py
"""
import json
import random

rng = random.Random(20061)

TOPICS = {
    "rec": "recommendation collaborative filtering user preference rating",
    "cit": "citation network bibliometric impact scholarly analysis",
    "ir": "retrieval ranking query search relevance index",
    "tm": "topic models latent dirichlet text mining corpus",
    "gr": "graph mining community detection link prediction",
    "nn": "neural networks deep learning representation embedding",
}

pubs = []


def add(pid, year, authors, topic, refs=None, extra_topic=None):
    words = TOPICS[topic].split()
    title_words = rng.sample(words, 3)
    if extra_topic:
        title_words += rng.sample(TOPICS[extra_topic].split(), 2)
    abstract_words = rng.sample(words, 4) + rng.sample(TOPICS[rng.choice(list(TOPICS))].split(), 2)
    pubs.append({
        "id": pid,
        "year": year,
        "title": " ".join(w.capitalize() for w in title_words),
        "abstract": "We study " + " ".join(abstract_words) + ".",
        "authors": authors,
        "references": list(refs or []),
        "_topic": topic,
    })


def earlier(year, topic=None, k=3, before=None):
    pool = [p["id"] for p in pubs if p["year"] < (before or year)]
    if topic:
        on_topic = [p["id"] for p in pubs if p["year"] < (before or year) and p["_topic"] == topic]
        pool = on_topic + rng.sample(pool, min(1, len(pool)))
    pool = sorted(set(pool))
    return sorted(rng.sample(pool, min(k, len(pool))))


topic_cycle = list(TOPICS)
# classic publications by senior researchers, 1995-2000
n = 0
for year in range(1995, 2001):
    for s in range(2):
        n += 1
        senior = f"S{(n % 4) + 1}"
        topic = topic_cycle[n % len(topic_cycle)]
        add(f"c{n:02d}", year, [senior], topic, earlier(year, k=2))
# J8 publishes before the restricted past: not a junior researcher
add("c99", 1999, ["J8"], "gr", earlier(1999, k=1))

# restricted past, 2001-2005
past_plan = [
    ("J1", 2, "rec"), ("J2", 1, "cit"), ("J3", 2, "ir"), ("J4", 1, "tm"),
    ("J5", 3, "gr"), ("J6", 2, "nn"), ("J7", 1, "rec"), ("J8", 1, "gr"),
]
m = 0
for author, count, topic in past_plan:
    for i in range(count):
        m += 1
        year = 2001 + (m % 5)
        add(f"p{m:02d}", year, [author], topic, earlier(year, topic, k=3))
# senior activity in the restricted past
add("p90", 2002, ["S1", "S2"], "ir", earlier(2002, k=2))
add("p91", 2004, ["S3"], "cit", earlier(2004, k=2))

# the future-reference edge cases for J1:
# p01 is J1's first past pub; a 2004 pub it cites in the past and again in the future
j1_past = [p for p in pubs if "J1" in p["authors"]]
j1_past_refs = sorted({r for p in j1_past for r in p["references"]})

# restricted future, 2006-2010
future_plan = [
    ("J1", 5, "rec"), ("J2", 6, "cit"), ("J3", 5, "ir"), ("J4", 5, "tm"),
    ("J5", 5, "gr"), ("J6", 4, "nn"), ("J8", 5, "gr"),
]
f = 0
for author, count, topic in future_plan:
    for i in range(count):
        f += 1
        year = 2006 + (f % 5)
        refs = earlier(year, topic, k=4)
        if author == "J1" and i == 0:
            refs = sorted(set(refs) | {j1_past_refs[0]})
        add(f"f{f:02d}", year, [author], topic, refs)
# J7: every future citation either repeats a past citation or targets a
# publication from 2006 onwards, so its future-reference set is empty
j7_past_refs = sorted({r for p in pubs if "J7" in p["authors"] for r in p["references"]})
for i in range(5):
    f += 1
    year = 2007 + (i % 4)
    recent = [p["id"] for p in pubs if 2006 <= p["year"] < year]
    refs = sorted(set(rng.sample(j7_past_refs, 1)) | set(rng.sample(recent, min(1, len(recent)))))
    add(f"f{f:02d}", year, ["J7"], "rec", refs)
# one dangling reference to an id outside the corpus
pubs[-1]["references"].append("missing-1")

# ---------------------------------------------------------------- oracle
T0, TP, TF = 2006, 2001, 2010
by_id = {p["id"]: p for p in pubs}
authors = sorted({a for p in pubs for a in p["authors"]})


def resolvable_refs(p):
    return [r for r in p["references"] if r in by_id and r != p["id"]]


def authored(a):
    return [p for p in pubs if a in p["authors"]]


def future_refs(a):
    out = []
    for cand in pubs:  # every (researcher, publication) pair
        if not cand["year"] < T0:
            continue
        cited_past = any(cand["id"] in resolvable_refs(q) for q in authored(a) if TP <= q["year"] < T0)
        cited_future = any(cand["id"] in resolvable_refs(q) for q in authored(a) if T0 <= q["year"] <= TF)
        if cited_future and not cited_past:
            out.append(cand["id"])
    return sorted(out)


eligible = []
for a in authors:
    mine = authored(a)
    n_past = sum(1 for q in mine if TP <= q["year"] < T0)
    n_future = sum(1 for q in mine if T0 <= q["year"] <= TF)
    junior = all(q["year"] >= TP for q in mine)
    if 1 <= n_past <= 2 and n_future >= 5 and junior and future_refs(a):
        eligible.append(a)

gt = {a: future_refs(a) for a in eligible}
pool = sorted({p for ids in gt.values() for p in ids})

with open("synthetic_corpus.jsonl", "w") as fh:
    for p in pubs:
        rec = {k: v for k, v in p.items() if not k.startswith("_")}
        fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
with open("synthetic_expected.json", "w") as fh:
    json.dump({"researchers": eligible, "ground_truth": gt, "candidate_pool": pool}, fh, indent=2)
    fh.write("\n")
print(len(pubs), "publications;", "eligible:", eligible, {a: len(v) for a, v in gt.items()}, "pool", len(pool))
