"""Regenerate data/toy_model.json: a small deterministic masked-LM stand-in
whose fills depend on the gender label of the person slot."""

import csv
import json
import pathlib

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"
PRONOUNS = {"he", "she", "him", "her", "his", "hers", "himself", "herself"}

# template id -> (female fills, male fills); the third fill is shared
FILLS = {
    "t01": (["happy", "beautiful", "here"], ["strong", "tall", "here"]),
    "t02": (["marriage", "home", "work"], ["job", "career", "work"]),
    "t03": (["marriage", "home", "work"], ["job", "career", "work"]),
    "t04": (["dancing", "shopping", "music"], ["football", "cars", "music"]),
    "t05": (["dance", "cook", "read"], ["fight", "fish", "read"]),
    "t06": (["dance", "cook", "read"], ["fight", "fish", "read"]),
    "t07": (["dance", "sing", "read"], ["fight", "win", "read"]),
    "t08": (["cook", "fight", "talk"], ["cook", "lose", "talk"]),
    "t09": (["fashion", "art", "music"], ["sports", "politics", "music"]),
    "t10": (["nursing", "art", "history"], ["engineering", "physics", "history"]),
    "t11": (["nursing", "art", "history"], ["engineering", "physics", "history"]),
    "t12": (["nursing", "psychology", "english"], ["engineering", "economics", "english"]),
    "t13": (["english", "art", "math"], ["math", "science", "history"]),
    "t14": (["english", "art", "math"], ["math", "science", "history"]),
}


def persons():
    out = []
    with open(DATA / "gendered_pairs.tsv") as f:
        seen = set()
        for row in csv.reader((l for l in f if not l.startswith("#")), delimiter="\t"):
            for word, label in ((row[0], row[1]), (row[2], row[3])):
                if word in PRONOUNS or word in seen:
                    continue
                seen.add(word)
                out.append({"surface": "the " + word, "label": label})
    with open(DATA / "names_sample.tsv") as f:
        for row in csv.reader((l for l in f if not l.startswith("#")), delimiter="\t"):
            female, male = int(row[1]), int(row[2])
            share = max(female, male) / (female + male)
            if share > 0.8:
                out.append({"surface": row[0], "label": "female" if female > male else "male"})
    return out


def main():
    templates = []
    with open(DATA / "disco_templates.txt") as f:
        for line in f:
            if line.startswith("#") or not line.strip():
                continue
            tid, group, text = line.rstrip("\n").split("\t")
            templates.append({"id": tid, "variant_group": group, "text": text})
    rules = []
    for tid, (fem, mal) in FILLS.items():
        for label, words in (("female", fem), ("male", mal)):
            rules.append({"template": tid, "label": label,
                          "fills": [{"token": w, "score": round(0.5 - 0.1 * i, 2)} for i, w in enumerate(words)]})
    spec = {
        "model_id": "toy-biased",
        "mask_token": "[MASK]",
        "seed": 7,
        "templates": templates,
        "persons": persons(),
        "fill_rules": rules,
        "default_fills": [{"token": w, "score": s} for w, s in (("it", 0.3), ("this", 0.2), ("that", 0.1))],
        "pair": {"identical_score": 5.0, "default_score": 2.5, "rules": []},
        "coref": {"default_p": 0.5, "rules": []},
        "classify": {"default": {"0": 0.5, "1": 0.5}, "rules": []},
    }
    (DATA / "toy_model.json").write_text(json.dumps(spec, indent=1) + "\n")


if __name__ == "__main__":
    main()
