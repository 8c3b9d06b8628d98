"""Regenerates the bundled synthetic corpus deterministically.

Produces roughly 30k tokens of template-grammar text over a Zipf-weighted
pseudo-word vocabulary of about 2,600 types, sprinkled with mentions and
hashtags so the preprocessing rules have something to strip.
"""

import random
from pathlib import Path

OUT = Path(__file__).parents[1] / "src" / "lm_worker" / "data" / "corpus.txt"

ONSETS = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
          "ch", "sh", "br", "tr", "kl", "gr"]
VOWELS = ["a", "e", "i", "o", "u", "ai", "ei", "ou"]
CODAS = ["", "", "n", "m", "r", "l", "s", "t", "k"]

FUNCTION_WORDS = ["the", "a", "and", "of", "to", "in", "on", "with", "for",
                  "but", "so", "at", "by", "from", "that", "this", "was", "is"]
VERBS = ["sees", "finds", "takes", "makes", "holds", "gives", "keeps",
         "sells", "buys", "meets", "calls", "sends", "leaves", "brings"]
ADVERBS = ["today", "again", "slowly", "quickly", "often", "rarely",
           "together", "alone", "early", "late"]


def pseudo_word(rng):
    n = rng.choice((2, 2, 3))
    return "".join(
        rng.choice(ONSETS) + rng.choice(VOWELS) + rng.choice(CODAS)
        for _ in range(n)
    )


def main():
    rng = random.Random(7)
    nouns = sorted({pseudo_word(rng) for _ in range(4000)})
    rng.shuffle(nouns)
    nouns = nouns[:3200]
    # Zipf-like weights, flattened so well over 2,000 types actually occur
    weights = [1.0 / (i + 40) for i in range(len(nouns))]

    def noun():
        return rng.choices(nouns, weights=weights, k=1)[0]

    lines = []
    total_tokens = 0
    while total_tokens < 30_000:
        tokens = []
        phrases = rng.choice((1, 2, 2, 3))
        for _ in range(phrases):
            tokens.append(rng.choice(FUNCTION_WORDS))
            if rng.random() < 0.5:
                tokens.append(noun())
            tokens.append(noun())
            tokens.append(rng.choice(VERBS))
            if rng.random() < 0.4:
                tokens.append(rng.choice(FUNCTION_WORDS))
                tokens.append(noun())
            if rng.random() < 0.3:
                tokens.append(rng.choice(ADVERBS))
        if rng.random() < 0.08:
            tokens.insert(0, f"@user{rng.randrange(50)}")
        if rng.random() < 0.08:
            tokens.append(f"#topic{rng.randrange(50)}")
        if rng.random() < 0.2:
            k = rng.randrange(len(tokens))
            tokens[k] = tokens[k].capitalize()
        lines.append(" ".join(tokens))
        total_tokens += sum(1 for t in tokens if not t.startswith(("@", "#")))

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"{OUT}: {len(lines)} lines, {total_tokens} usable tokens")


if __name__ == "__main__":
    main()
