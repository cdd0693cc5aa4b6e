"""Deterministic toy assets: a word-toxicity lexicon and synthetic corpora.

The lexicon is a fixed, hand-assigned map over real English words — the
desk-scale stand-in for a trained toxicity classifier. The corpus generator
emits class-clustered word sentences (runs of neutral words, runs of charged
words) so a bigram model trained on it learns both in-class continuation and
cross-class switching.
"""

from __future__ import annotations

import numpy as np

_TOXIC_WORDS = [
    "idiot", "idiots", "stupid", "moron", "morons", "dumb", "fool", "fools",
    "trash", "garbage", "pathetic", "loser", "losers", "worthless", "scum",
    "filth", "disgusting", "hate", "hateful", "destroy", "destroyers", "kill",
    "death", "ruin", "wreck", "vile", "toxic", "awful", "terrible", "horrible",
    "evil", "rotten", "nasty", "creep", "creeps", "jerk", "jerks", "clown",
    "clowns", "parasite", "parasites", "vermin", "coward", "cowards", "liar",
    "liars", "fraud", "frauds", "crook", "crooks", "thug", "thugs", "savage",
    "brainless", "clueless", "useless", "hopeless", "shameful", "disgrace",
    "menace", "plague", "poison", "venom", "lunatic", "maniac", "degenerate",
    "imbecile", "buffoon", "nitwit", "halfwit", "dimwit",
]

_NEUTRAL_WORDS = [
    "the", "a", "an", "of", "to", "in", "and", "or", "but", "for", "with",
    "about", "over", "under", "into", "from", "people", "person", "time",
    "times", "year", "years", "world", "country", "countries", "nation",
    "nations", "politics", "political", "power", "government", "community",
    "generation", "generations", "young", "older", "resources", "consume",
    "everything", "thinking", "attempt", "attempts", "progressives", "gain",
    "past", "few", "across", "western", "several", "there", "have", "has",
    "been", "by", "are", "is", "was", "were", "who", "they", "them", "their",
    "we", "our", "you", "your", "this", "that", "these", "those", "it", "its",
    "house", "water", "tree", "book", "road", "city", "town", "friend",
    "family", "school", "work", "day", "night", "morning", "idea", "ideas",
    "question", "questions", "answer", "answers", "problem", "problems",
    "solution", "change", "changes", "history", "future", "story", "stories",
    "news", "media", "social", "online", "post", "posts", "comment",
    "comments", "reader", "readers", "writer", "writers", "text", "sentence",
    "sentences", "meaning", "view", "views", "opinion", "opinions", "debate",
    "discussion", "argument", "point", "points", "fact", "facts", "truth",
    "belief", "beliefs", "value", "values", "culture", "society", "group",
    "groups", "member", "members", "leader", "leaders", "election", "vote",
    "votes", "policy", "policies", "law", "laws", "right", "left", "party",
    "parties", "movement", "movements", "protest", "reform", "economy",
    "money", "market", "markets", "job", "jobs", "worker", "workers",
    "business", "trade", "growth", "decline", "crisis", "plan", "plans",
    "goal", "goals", "effort", "efforts", "action", "actions", "reaction",
    "response", "result", "results", "effect", "effects", "cause", "causes",
    "reason", "reasons", "way", "ways", "thing", "things", "part", "parts",
    "place", "places", "case", "cases", "week", "month", "life", "word",
    "words", "number", "level", "rate", "kind", "sort", "type", "form",
    "line", "side", "end", "start", "turn", "talk", "speak", "say", "tell",
    "ask", "know", "think", "believe", "feel", "see", "look", "watch",
    "read", "write", "learn", "teach", "study", "find", "give", "take",
    "make", "build", "create", "bring", "keep", "leave", "stay", "move",
    "live", "grow", "rise", "fall", "open", "close", "begin", "continue",
    "stop", "help", "support", "oppose", "agree", "disagree", "accept",
    "reject", "share", "discuss",
]

# mildly charged words sit between the classes; they give the scorer a
# middle ground and the Reddit-style demo sentences their texture
_CHARGED_WORDS = {
    "woke": 0.30, "inexperienced": 0.15, "idealistic": 0.12, "naive": 0.25,
    "extreme": 0.25, "radical": 0.30, "angry": 0.25, "blame": 0.25,
    "attack": 0.35, "fight": 0.30, "destroying": 0.45, "mindless": 0.40,
    "mindlessly": 0.40, "selfish": 0.40, "greedy": 0.40, "ignorant": 0.45,
    "reckless": 0.35, "corrupt": 0.45, "lazy": 0.35, "arrogant": 0.40,
}


def toy_lexicon() -> dict[str, float]:
    """Fixed word -> toxicity map: 68 toxic, 20 charged, 240+ neutral words.

    Toxic values alternate between a mild band (0.52-0.64) and a severe band
    (0.88-1.0) so the toxic class has internal spread, mirroring mild insults
    vs strong abuse.
    """
    lex: dict[str, float] = {}
    for i, word in enumerate(_TOXIC_WORDS):
        if i % 2 == 0:
            lex[word] = round(0.52 + 0.12 * ((i // 2) % 4) / 3.0, 3)
        else:
            lex[word] = round(0.88 + 0.12 * ((i // 2) % 4) / 3.0, 3)
    for i, word in enumerate(_NEUTRAL_WORDS):
        lex[word] = round(0.06 * (i % 5) / 4.0, 3)
    lex.update(_CHARGED_WORDS)
    return lex


def split_by_class(lexicon: dict[str, float],
                   threshold: float = 0.5) -> tuple[list[str], list[str]]:
    """(neutral, toxic) word lists, sorted for determinism."""
    neutral = sorted(w for w, v in lexicon.items() if v < threshold)
    toxic = sorted(w for w, v in lexicon.items() if v >= threshold)
    return neutral, toxic


def synthetic_corpus(lexicon: dict[str, float],
                     n_sentences: int = 220,
                     seed: int = 0,
                     stay_prob: float = 0.8,
                     toxic_start: float = 0.5,
                     length_range: tuple[int, int] = (8, 14),
                     severity_split: bool = False,
                     toxic_stay: float | None = None,
                     bridge_words: int = 0,
                     max_neutral: int | None = None,
                     max_toxic: int | None = None) -> list[str]:
    """Class-clustered sentences: a sticky walk between word pools, uniform
    word choice within the active pool.

    With severity_split the toxic pool is split at 0.8 into mild and severe
    sub-pools that cluster separately (three-state walk); otherwise the walk
    has two states. ``toxic_stay`` makes toxic runs less sticky than neutral
    ones (defaults to stay_prob). ``bridge_words`` > 0 routes every class
    switch through one of that many shared function words, so switching mass
    concentrates on tokens both classes use. ``max_neutral``/``max_toxic``
    cap the pool sizes to keep the trained vocabulary dense on small corpora.
    """
    neutral, toxic = split_by_class(lexicon)
    if max_neutral is not None:
        neutral = neutral[:max_neutral]
    if max_toxic is not None:
        toxic = toxic[:max_toxic]
    bridges = neutral[:bridge_words] if bridge_words else []
    if bridge_words:
        neutral = neutral[bridge_words:]
    if severity_split:
        pools = [neutral,
                 sorted(w for w in toxic if lexicon[w] < 0.8),
                 sorted(w for w in toxic if lexicon[w] >= 0.8)]
    else:
        pools = [neutral, toxic]
    if toxic_stay is None:
        toxic_stay = stay_prob
    rng = np.random.default_rng(seed)
    lo, hi = length_range
    lines = []
    for _ in range(n_sentences):
        length = int(rng.integers(lo, hi + 1))
        if rng.random() < toxic_start:
            state = 1 if len(pools) == 2 else int(rng.integers(1, len(pools)))
        else:
            state = 0
        words = []
        while len(words) < length:
            pool = pools[state]
            words.append(pool[int(rng.integers(len(pool)))])
            stay = stay_prob if state == 0 else toxic_stay
            if rng.random() >= stay:
                if state == 0 or len(pools) == 2:
                    others = [s for s in range(len(pools)) if s != state]
                    state = others[int(rng.integers(len(others)))]
                elif rng.random() < 0.75:
                    state = 0  # charged runs mostly relax back to neutral
                else:
                    state = 3 - state  # mild <-> severe
                if bridges and len(words) < length:
                    words.append(bridges[int(rng.integers(len(bridges)))])
        lines.append(" ".join(words))
    return lines


def bucket_sentences(lexicon: dict[str, float],
                     n_per_bucket: int,
                     seed: int = 0,
                     length_range: tuple[int, int] = (10, 14),
                     max_neutral: int | None = None,
                     max_toxic: int | None = None) -> list[list[str]]:
    """Synthetic input sentences grouped by measured (mean-lexicon) toxicity
    into the five standard intervals, n_per_bucket each.

    Words are drawn i.i.d. with a toxic rate (and severe-vs-mild share)
    chosen to land near a desired mean; sentences are then assigned by their
    actual measured score, so every returned sentence really belongs to its
    bucket.
    """
    neutral, toxic = split_by_class(lexicon)
    if max_neutral is not None:
        neutral = neutral[:max_neutral]
    if max_toxic is not None:
        toxic = toxic[:max_toxic]
    mild = sorted(w for w in toxic if lexicon[w] < 0.8)
    severe = sorted(w for w in toxic if lexicon[w] >= 0.8)
    v_neut = float(np.mean([lexicon[w] for w in neutral]))
    v_mild = float(np.mean([lexicon[w] for w in mild])) if mild else 0.6
    v_sev = float(np.mean([lexicon[w] for w in severe])) if severe else 0.95

    rng = np.random.default_rng(seed)
    buckets: list[list[str]] = [[] for _ in range(5)]
    lo, hi = length_range
    guard = 0
    while any(len(b) < n_per_bucket for b in buckets) and guard < 500000:
        guard += 1
        want = min(range(5), key=lambda b: len(buckets[b]))
        m = float(rng.uniform(0.2 * want, 0.2 * want + 0.2))
        # toxic rate q and severe share r that hit mean m in expectation
        q = min(1.0, max(0.0, (m - v_neut) / (v_mild - v_neut)))
        r = 0.0
        if q >= 1.0:
            r = min(1.0, max(0.0, (m - v_mild) / (v_sev - v_mild)))
        length = int(rng.integers(lo, hi + 1))
        words = []
        for _ in range(length):
            if rng.random() < q:
                pool = severe if (severe and rng.random() < r) else mild
            else:
                pool = neutral
            words.append(pool[int(rng.integers(len(pool)))])
        score = float(np.mean([lexicon[w] for w in words]))
        b = min(4, int(score / 0.2)) if score < 1.0 else 4
        if len(buckets[b]) < n_per_bucket:
            buckets[b].append(" ".join(words))
    if any(len(b) < n_per_bucket for b in buckets):
        raise RuntimeError("could not fill all toxicity buckets; widen length_range "
                           "or check the lexicon value spread")
    return buckets


def demo_sentences() -> list[dict]:
    """A small reference dataset in the JSONL record shape, with two
    human-style interpretations per sentence."""
    return [
        {
            "id": "s1",
            "sentence": "Over the past few years across western nations there have been several attempts by progressives to gain power",
            "interpretations": [
                "politics in western countries keep changing as groups attempt to gain power",
                "over the past few years progressives have made several attempts to gain power",
            ],
        },
        {
            "id": "s2",
            "sentence": "Zoomers are inexperienced idealistic fools who are woke and boomers are world destroyers who consume everything without thinking and will be the death of us all",
            "interpretations": [
                "the young generation is idealistic and the older generation consumes resources mindlessly",
                "zoomers are naive fools and boomers are destroyers who will ruin everything",
            ],
        },
        {
            "id": "s3",
            "sentence": "The media keep destroying every debate with mindless garbage and the readers believe everything",
            "interpretations": [
                "the writer thinks media coverage makes debate worse and readers are not critical",
                "media reports are garbage and readers mindlessly accept them",
            ],
        },
        {
            "id": "s4",
            "sentence": "Our community found a way to support workers and help families grow",
            "interpretations": [
                "the community helps workers and families",
                "people in the community support workers so families can grow",
            ],
        },
        {
            "id": "s5",
            "sentence": "These corrupt leaders are liars and frauds who ruin the economy and blame the workers",
            "interpretations": [
                "the writer believes the leaders are dishonest and harm the economy",
                "corrupt politicians lie and make workers take the blame for decline",
            ],
        },
    ]
