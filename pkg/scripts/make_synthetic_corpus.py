#!/usr/bin/env python3
"""Generate a small synthetic event-argument corpus (canonical JSONL) plus a
matching ontology and coreference sidecar, for demos and smoke runs.

Documents are 5-sentence windows with one annotated event each; a slice of
the arguments is placed in a different sentence than the trigger so that
distance breakdowns and augmentation have something to chew on.

Usage:
    python scripts/make_synthetic_corpus.py --out demo_data --docs 50 --seed 7
"""

import argparse
import json
import os
import random

EVENT_TYPES = {
    "transaction.import": ["artifact", "origin", "destination"],
    "government.agreement": ["violator", "otherparticipant", "place"],
    "conflict.attack": ["attacker", "target", "instrument", "place"],
    "movement.transport": ["transporter", "artifact", "origin", "destination"],
}

SUBJECTS = ["Smugglers", "Officials", "Rebels", "Traders", "Envoys", "Brokers"]
VERBS = {
    "transaction.import": "importing",
    "government.agreement": "agreement",
    "conflict.attack": "attack",
    "movement.transport": "transporting",
}
OBJECTS = ["oil", "weapons", "grain", "medicine", "machinery", "cash"]
PLACES = ["Aleppo", "Basra", "Odessa", "Tripoli", "Mosul", "Karachi"]
PEOPLE = ["Clinton", "Lavrov", "Haddad", "Okafor", "Ibrahim", "Petrov"]
FILLER = ["Markets", "reacted", "slowly", "while", "observers", "waited",
          "and", "reports", "kept", "coming", "in", "overnight"]


def build_doc(rng, index):
    event_type = rng.choice(sorted(EVENT_TYPES))
    trigger_word = VERBS[event_type]
    sentences = []
    for _ in range(5):
        n = rng.randint(5, 9)
        sentences.append([rng.choice(FILLER) for _ in range(n - 1)] + ["."])
    trigger_sentence = rng.randint(1, 3)
    sent = sentences[trigger_sentence]
    sent[rng.randint(0, max(0, len(sent) - 3))] = trigger_word

    tokens = []
    ranges = []
    for s in sentences:
        start = len(tokens)
        tokens.extend(s)
        ranges.append([start, len(tokens)])
    trigger_pos = tokens.index(trigger_word)

    arguments = []
    roles = EVENT_TYPES[event_type]
    fillers = {"artifact": OBJECTS, "origin": PLACES, "destination": PLACES,
               "place": PLACES, "target": PLACES, "instrument": OBJECTS}
    for role in roles:
        if rng.random() < 0.3:
            continue  # role absent: downstream no-answer instance
        word = rng.choice(fillers.get(role, PEOPLE))
        if rng.random() < 0.5:
            sentence_index = trigger_sentence
        else:
            sentence_index = rng.randint(0, 4)
        lo, hi = ranges[sentence_index]
        candidates = [i for i in range(lo, hi - 1) if i != trigger_pos]
        if not candidates:
            continue
        pos = rng.choice(candidates)
        tokens[pos] = word
        if pos == trigger_pos:
            continue
        arguments.append({"role": role, "start": pos, "end": pos})
    trigger_pos = tokens.index(trigger_word)

    return {
        "doc_id": f"synth-{index:04d}",
        "tokens": tokens,
        "sentences": ranges,
        "events": [{
            "event_type": event_type,
            "trigger": [trigger_pos, trigger_pos],
            "arguments": arguments,
        }],
    }


def build_chains(record, rng):
    """Fake chains: every repeated surface form becomes one chain."""
    positions = {}
    for i, token in enumerate(record["tokens"]):
        if token in PEOPLE + OBJECTS + PLACES:
            positions.setdefault(token, []).append(i)
    chains = [
        [{"start": i, "end": i} for i in occurrences]
        for occurrences in positions.values()
        if len(occurrences) >= 2
    ]
    return chains


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--docs", type=int, default=50)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    os.makedirs(args.out, exist_ok=True)
    corpus_path = os.path.join(args.out, "corpus.jsonl")
    chains_path = os.path.join(args.out, "chains.jsonl")
    ontology_path = os.path.join(args.out, "ontology.json")

    with open(corpus_path, "w", encoding="utf-8") as corpus_file, \
            open(chains_path, "w", encoding="utf-8") as chains_file:
        for index in range(args.docs):
            record = build_doc(rng, index)
            corpus_file.write(json.dumps(record) + "\n")
            chains = build_chains(record, rng)
            if chains:
                chains_file.write(json.dumps({"doc_id": record["doc_id"],
                                              "chains": chains}) + "\n")
    with open(ontology_path, "w", encoding="utf-8") as handle:
        json.dump(EVENT_TYPES, handle, indent=2, sort_keys=True)
        handle.write("\n")
    print(f"wrote {args.docs} documents to {corpus_path}")
    print(f"wrote ontology to {ontology_path}")
    print(f"wrote coref sidecar to {chains_path}")


if __name__ == "__main__":
    main()
