#!/usr/bin/env python3
"""Regenerates mini.de / mini.en, a small synthetic German-English corpus.

Covers verb-final reordering, adjective placement, one-to-two words
(zum -> to the) and unaligned particles (ja, doch).
"""
import random
import sys
from pathlib import Path

NOUNS = {
    "haus": "house", "buch": "book", "auto": "car", "kind": "child",
    "fenster": "window", "brot": "bread", "wasser": "water", "bild": "picture",
    "lied": "song", "spiel": "game", "geld": "money", "boot": "boat",
}
ADJS = {
    "alte": "old", "neue": "new", "kleine": "small", "grosse": "big",
    "rote": "red", "schoene": "nice", "kalte": "cold", "gute": "good",
}
PARTS = {
    "gesehen": "seen", "gekauft": "bought", "gelesen": "read", "gefunden": "found",
    "gemalt": "painted", "verkauft": "sold", "gebracht": "brought", "gesucht": "looked for",
}
SUBJ = {
    "ich": ("i", "habe", "have"), "du": ("you", "hast", "have"), "er": ("he", "hat", "has"),
    "sie": ("she", "hat", "has"), "wir": ("we", "haben", "have"),
}
PLACES = {"schule": "school", "markt": "market", "bahnhof": "station", "park": "park"}
VERBS = {"gehe": ("i", "go"), "laufe": ("i", "walk"), "fahre": ("i", "drive")}
PARTICLES = ["ja", "doch"]


def noun_phrase(rng):
    n = rng.choice(sorted(NOUNS))
    if rng.random() < 0.5:
        a = rng.choice(sorted(ADJS))
        return ["das", a, n], ["the", ADJS[a], NOUNS[n]]
    return ["das", n], ["the", NOUNS[n]]


def perfect(rng):
    s = rng.choice(sorted(SUBJ))
    en_s, aux, en_aux = SUBJ[s]
    de_np, en_np = noun_phrase(rng)
    p = rng.choice(sorted(PARTS))
    de = [s, aux] + (["ja"] if rng.random() < 0.3 else []) + de_np + [p]
    en = [en_s, en_aux] + PARTS[p].split() + en_np
    return de, en


def motion(rng):
    v = rng.choice(sorted(VERBS))
    pl = rng.choice(sorted(PLACES))
    de = ["ich", v] + (["doch"] if rng.random() < 0.3 else []) + ["zum", pl]
    en = list(VERBS[v]) + ["to", "the", PLACES[pl]]
    return de, en


def copula(rng):
    n = rng.choice(sorted(NOUNS))
    a = rng.choice(sorted(ADJS))
    return ["das", n, "ist", a.rstrip("e")], ["the", NOUNS[n], "is", ADJS[a]]


def main():
    count = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
    rng = random.Random(20240611)
    out = Path(__file__).resolve().parent
    de_lines, en_lines = [], []
    for _ in range(count):
        de, en = rng.choice([perfect, perfect, motion, copula])(rng)
        de_lines.append(" ".join(de))
        en_lines.append(" ".join(en))
    (out / "mini.de").write_text("\n".join(de_lines) + "\n")
    (out / "mini.en").write_text("\n".join(en_lines) + "\n")


if __name__ == "__main__":
    main()
