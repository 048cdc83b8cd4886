#!/usr/bin/env python3
"""Builds data/tag_lexicon.tsv from the Brill lexicon and word-frequency list
shipped with pattern3 (BSD; Brill lexicon MIT).

usage: make_tag_lexicon.py PATTERN_EN_DIR OUT_TSV [N_WORDS]

Entries from tag_overrides.tsv (next to this script) replace or extend the
derived tags.
"""
import os
import re
import sys

MODALS = {"may", "might", "can", "could", "will", "would", "shall", "should", "must"}

COARSE = {
    "NN": "NOUN", "NNS": "NOUN", "NNP": "NOUN", "NNPS": "NOUN",
    "VB": "VERB", "VBD": "VERB", "VBG": "VERB", "VBN": "VERB", "VBP": "VERB", "VBZ": "VERB",
    "MD": "MODAL",
    "PRP": "PRONOUN", "PRP$": "PRONOUN", "WP": "PRONOUN", "WP$": "PRONOUN",
    "JJ": "ADJ", "JJR": "ADJ", "JJS": "ADJ",
    "RB": "ADV", "RBR": "ADV", "RBS": "ADV", "WRB": "ADV",
    "CD": "NUM",
}


def main():
    src, out = sys.argv[1], sys.argv[2]
    limit = int(sys.argv[3]) if len(sys.argv) > 3 else 5000
    lex = {}
    with open(f"{src}/en-lexicon.txt", encoding="utf-8") as f:
        for line in f:
            if line.startswith(";;;"):
                continue
            parts = line.split()
            if len(parts) < 2:
                continue
            word, tag = parts[0], parts[1]
            low = word.lower()
            # lowercase entries win over capitalized ones
            if low not in lex or word == low:
                lex[low] = tag
    words = []
    seen = set()
    with open(f"{src}/en-frequency.txt", encoding="utf-8") as f:
        for line in f:
            w = line.split()[0].lower()
            if w in seen or not re.fullmatch(r"[a-z]+(?:'[a-z]+)?", w):
                continue
            if w not in lex:
                continue
            seen.add(w)
            words.append(w)
            if len(words) >= limit:
                break
    tags = {}
    for w in words:
        tag = COARSE.get(lex[w], "OTHER")
        if tag == "MODAL" and w not in MODALS:
            tag = "VERB"
        tags[w] = tag
    overrides = os.path.join(os.path.dirname(os.path.abspath(__file__)), "tag_overrides.tsv")
    with open(overrides, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            w, tag = line.split("\t")
            tags[w] = tag
    with open(out, "w", encoding="utf-8") as f:
        f.write("# Coarse part-of-speech lexicon: word<TAB>TAG\n")
        f.write("# Tags: NOUN VERB MODAL PRONOUN ADJ ADV PUNCT NUM OTHER\n")
        f.write("# Derived from the Brill tagger lexicon (most frequent tag per word)\n")
        f.write("# restricted to the most frequent English words.\n")
        for w in sorted(tags):
            f.write(f"{w}\t{tags[w]}\n")


if __name__ == "__main__":
    main()
