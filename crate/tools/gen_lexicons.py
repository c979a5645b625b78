#!/usr/bin/env python3
"""Regenerate lexicons/lemmas.tsv and lexicons/synonyms.tsv from WordNet database files.

usage: gen_lexicons.py <wordnet-dict-dir> <lexicons-dir>

The WordNet dict directory must contain index.{noun,verb,adj,adv},
data.{noun,verb,adj,adv} and the *.exc exception lists.
"""
import os
import re
import sys

POS = ["noun", "verb", "adj", "adv"]
ALPHA = re.compile(r"^[a-z]+$")
MAX_SYNONYMS = 4
SYNONYM_ENTRIES = 2000


def read_function_words(path):
    words = set()
    for line in open(path, encoding="utf-8"):
        line = line.split("#", 1)[0].strip().lower()
        if line:
            words.add(line)
    return words


def read_index(wn, pos, counts):
    entries = {}
    for line in open(os.path.join(wn, "index." + pos), encoding="utf-8"):
        if line.startswith(" "):
            continue
        parts = line.split()
        lemma = parts[0]
        p_cnt = int(parts[3])
        rest = parts[4 + p_cnt:]
        offsets = rest[2:]
        entries[lemma] = (counts.get((lemma, pos), 0), offsets)
    return entries


def read_sense_counts(wn):
    counts = {}
    for line in open(os.path.join(wn, "cntlist.rev"), encoding="utf-8"):
        key, _, tagged = line.split()
        lemma, rest = key.split("%", 1)
        pos = {"1": "noun", "2": "verb", "3": "adj", "4": "adv", "5": "adj"}[rest[0]]
        counts[(lemma, pos)] = counts.get((lemma, pos), 0) + int(tagged)
    return counts


def read_synsets(wn, pos):
    synsets = {}
    for line in open(os.path.join(wn, "data." + pos), encoding="utf-8"):
        if line.startswith(" "):
            continue
        parts = line.split()
        if len(parts) < 4 or not parts[0].isdigit():
            continue
        count = int(parts[3], 16)
        words = [parts[4 + 2 * i].lower() for i in range(count)]
        synsets[parts[0]] = [re.sub(r"\(.*\)$", "", w) for w in words]
    return synsets


def regular_forms(lemma, pos):
    out = []
    if pos in ("noun", "verb"):
        if re.search(r"(s|x|z|ch|sh)$", lemma):
            out.append(lemma + "es")
        elif re.search(r"[^aeiou]y$", lemma):
            out.append(lemma[:-1] + "ies")
        else:
            out.append(lemma + "s")
    if pos == "verb":
        if lemma.endswith("e"):
            out.append(lemma + "d")
            if not lemma.endswith("ee"):
                out.append(lemma[:-1] + "ing")
            else:
                out.append(lemma + "ing")
        elif re.search(r"[^aeiou]y$", lemma):
            out.append(lemma[:-1] + "ied")
            out.append(lemma + "ing")
        else:
            out.append(lemma + "ed")
            out.append(lemma + "ing")
    return out


def main():
    wn, lexdir = sys.argv[1], sys.argv[2]
    fwl = read_function_words(os.path.join(lexdir, "function_words.txt"))

    counts = read_sense_counts(wn)
    index = {pos: read_index(wn, pos, counts) for pos in POS}
    freq = {}
    best_pos = {}
    for pos in POS:
        for lemma, (tagged, _) in index[pos].items():
            if not ALPHA.match(lemma) or len(lemma) < 3 or lemma in fwl:
                continue
            if tagged < 1:
                continue
            freq[lemma] = freq.get(lemma, 0) + tagged
            if tagged > best_pos.get(lemma, ("", -1))[1]:
                best_pos[lemma] = (pos, tagged)
    content = set(freq)

    surface = {}
    for lemma in content:
        surface[lemma] = lemma
    for pos in POS:
        for line in open(os.path.join(wn, pos + ".exc"), encoding="utf-8"):
            parts = line.split()
            if len(parts) < 2:
                continue
            form, lemma = parts[0], parts[1]
            if lemma in content and ALPHA.match(form) and form not in content and form not in fwl:
                surface.setdefault(form, lemma)
    for lemma in sorted(content):
        for pos in POS:
            if lemma not in index[pos]:
                continue
            for form in regular_forms(lemma, pos):
                if form not in content and form not in fwl:
                    surface.setdefault(form, lemma)

    function_lemmas = {
        "am": "be", "is": "be", "are": "be", "was": "be", "were": "be",
        "been": "be", "being": "be", "has": "have", "had": "have",
        "having": "have", "does": "do", "did": "do", "done": "do",
        "doing": "do", "me": "i", "us": "we", "him": "he", "them": "they",
    }

    with open(os.path.join(lexdir, "lemmas.tsv"), "w", encoding="utf-8") as out:
        out.write("# surface<TAB>lemma[<TAB>C]; C marks the lemma as a content word\n")
        for form, lemma in sorted(function_lemmas.items()):
            out.write(f"{form}\t{lemma}\n")
        for form in sorted(surface):
            out.write(f"{form}\t{surface[form]}\tC\n")

    synsets = {pos: read_synsets(wn, pos) for pos in POS}
    ranked = sorted(content, key=lambda w: (-freq[w], w))
    written = 0
    with open(os.path.join(lexdir, "synonyms.tsv"), "w", encoding="utf-8") as out:
        out.write("# lemma<TAB>comma-separated synonyms\n")
        rows = []
        for lemma in ranked:
            pos = best_pos[lemma][0]
            syns = []
            for offset in index[pos][lemma][1][:2]:
                for word in synsets[pos].get(offset, []):
                    if word == lemma or word in syns or word in fwl:
                        continue
                    if ALPHA.match(word) and word in content:
                        syns.append(word)
                if len(syns) >= 2:
                    break
            if syns:
                rows.append((lemma, syns[:MAX_SYNONYMS]))
            if len(rows) >= SYNONYM_ENTRIES:
                break
        for lemma, syns in sorted(rows):
            out.write(f"{lemma}\t{','.join(syns)}\n")
            written += 1
    print(f"content lemmas: {len(content)}; lemma rows: {len(surface)}; synonym rows: {written}")


if __name__ == "__main__":
    main()
