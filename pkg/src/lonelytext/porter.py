"""Porter (1980) suffix-stripping stemmer.

Follows Martin Porter's reference implementation, which differs from the
1980 article in two step-2 rules: ``bli -> ble`` replaces ``abli -> able``
and ``logi -> log`` is added. Words of two letters or fewer are returned
unchanged.
"""

_VOWELS = frozenset("aeiou")

_STEP2 = (
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("bli", "ble"), ("alli", "al"), ("entli", "ent"),
    ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
    ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
    ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
    ("logi", "log"),
)
_STEP3 = (
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""), ("ness", ""),
)
_STEP4 = (
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment",
    "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
)


def _longest(word, rules):
    """Longest rule whose suffix ends ``word``; rules are suffixes or (suffix, repl)."""
    best, best_len = None, 0
    for rule in rules:
        suffix = rule if isinstance(rule, str) else rule[0]
        if len(suffix) > best_len and word.endswith(suffix):
            best, best_len = rule, len(suffix)
    return best


def _is_consonant(w, i):
    c = w[i]
    if c in _VOWELS:
        return False
    if c == "y":
        return i == 0 or not _is_consonant(w, i - 1)
    return True


def _measure(stem):
    """Number of VC sequences in ``stem`` ([C](VC)^m[V])."""
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        cons = _is_consonant(stem, i)
        if cons and prev_vowel:
            m += 1
        prev_vowel = not cons
    return m


def _has_vowel(stem):
    return any(not _is_consonant(stem, i) for i in range(len(stem)))


def _double_consonant(w):
    return len(w) >= 2 and w[-1] == w[-2] and _is_consonant(w, len(w) - 1)


def _cvc(w):
    if len(w) < 3:
        return False
    n = len(w)
    return (_is_consonant(w, n - 3) and not _is_consonant(w, n - 2)
            and _is_consonant(w, n - 1) and w[-1] not in "wxy")


def _step1a(w):
    if w.endswith("sses"):
        return w[:-2]
    if w.endswith("ies"):
        return w[:-2]
    if w.endswith("ss"):
        return w
    if w.endswith("s"):
        return w[:-1]
    return w


def _step1b(w):
    if w.endswith("eed"):
        return w[:-1] if _measure(w[:-3]) > 0 else w
    for suffix in ("ed", "ing"):
        if w.endswith(suffix):
            stem = w[: -len(suffix)]
            if not _has_vowel(stem):
                return w
            w = stem
            break
    else:
        return w
    if w.endswith(("at", "bl", "iz")):
        return w + "e"
    if _double_consonant(w) and w[-1] not in "lsz":
        return w[:-1]
    if _measure(w) == 1 and _cvc(w):
        return w + "e"
    return w


def _step1c(w):
    if w.endswith("y") and _has_vowel(w[:-1]):
        return w[:-1] + "i"
    return w


def _replace_rules(w, rules):
    hit = _longest(w, rules)
    if hit is None:
        return w
    suffix, repl = hit
    stem = w[: -len(suffix)]
    return stem + repl if _measure(stem) > 0 else w


def _step4(w):
    suffix = _longest(w, _STEP4)
    if suffix is None:
        return w
    stem = w[: -len(suffix)]
    if suffix == "ion" and not (stem and stem[-1] in "st"):
        return w
    return stem if _measure(stem) > 1 else w


def _step5(w):
    if w.endswith("e"):
        m = _measure(w[:-1])
        if m > 1 or (m == 1 and not _cvc(w[:-1])):
            w = w[:-1]
    if w.endswith("ll") and _measure(w) > 1:
        return w[:-1]
    return w


def stem_word(word):
    """Stem one lowercase word."""
    if len(word) <= 2:
        return word
    w = _step1a(word)
    w = _step1b(w)
    w = _step1c(w)
    w = _replace_rules(w, _STEP2)
    w = _replace_rules(w, _STEP3)
    w = _step4(w)
    return _step5(w)
