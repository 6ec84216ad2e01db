"""Regenerate the bundled demo lexicon, summary definitions and filler words.

    python tools/make_demo_lexicon.py

Every word tagged with a child category is also tagged with all of its
ancestors, so parent percentages always dominate child percentages.
"""
import json
import random
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "bpdetect" / "data"

PARENT = {
    "ppron": "pronoun", "ipron": "pronoun",
    "i": "ppron", "we": "ppron", "you": "ppron", "shehe": "ppron", "they": "ppron",
    "posemo": "affect", "negemo": "affect",
    "anxiety": "negemo", "anger": "negemo", "sad": "negemo",
    "family": "social", "friends": "social",
    "insight": "cogproc", "certain": "cogproc",
    "see": "percept", "hear": "percept", "feel": "percept",
    "body": "bio", "health": "bio",
    "affiliation": "drives", "achieve": "drives", "power": "drives",
    "reward": "drives", "risk": "drives",
    "swear": "informal", "netspeak": "informal",
}

ORDER = [
    "pronoun", "ppron", "i", "we", "you", "shehe", "they", "ipron", "article",
    "prep", "auxverb", "conj", "negate", "affect", "posemo", "negemo", "anxiety",
    "anger", "sad", "social", "family", "friends", "cogproc", "insight", "certain",
    "percept", "see", "hear", "feel", "bio", "body", "health", "drives",
    "affiliation", "achieve", "power", "reward", "risk", "time", "work", "leisure",
    "money", "relig", "death", "informal", "swear", "netspeak",
]

WORDS = {
    "i": "i me my mine myself i'm i've i'll i'd",
    "we": "we us our ours ourselves we're we've let's",
    "you": "you your yours yourself you're you've ya u",
    "shehe": "he she him her his hers himself herself he's she's",
    "they": "they them their theirs themselves they're",
    "ipron": "it its it's this that those these something anything everything someone anyone which what",
    "article": "a an the",
    "prep": "in on at with from into about under over through for of to by",
    "auxverb": "am is are was were be been being have has had do does did will would can could should",
    "conj": "and but or because although while yet",
    "negate": "not no never nothing nobody don't can't won't isn't didn't",
    "posemo": "happy happi* love loved lovely nice good great glad joy* excit* wonderful awesome laugh* hope fun beautiful proud enjoy* cheer*",
    "negemo": "bad awful terribl* wrong ugly horribl* worst sucks weird",
    "anxiety": "worri* nervous* anxi* fear* afraid scared panic* tense uneasy stress*",
    "anger": "hate hated angry anger* mad furious annoy* rage* hostil* irritat*",
    "sad": "sad sadly sadness cry crying cried tears grief lonely alone hopeless* depress* miss missed unhappy",
    "social": "talk* share* said say says tell* people person guys",
    "family": "mom dad mother* father* brother* sister* family son daughter* wife husband aunt* uncle*",
    "friends": "friend* buddy buddies pal pals roommate* mate neighbor*",
    "insight": "think* thought* know* knew understand* realiz* believ* idea* meaning*",
    "certain": "always certain* definitely sure clearly obvious* absolutely totally completely",
    "see": "see saw seen look* watch* view* seeing",
    "hear": "hear heard listen* sound* loud quiet*",
    "feel": "feel feels feeling* felt touch* hold* soft* warm*",
    "body": "body head hand* face eye* heart* skin leg* brain*",
    "health": "health* doctor* hospital* medic* meds pill* therap* clinic* sick* ill illness* diagnos* symptom* psychiatr* pain*",
    "affiliation": "together ally allies community join* team* partner*",
    "achieve": "win* won success* achiev* goal* accomplish* best earn* effort*",
    "power": "boss* control* power* leader* command* strong* weak* superior* authorit* rank*",
    "reward": "prize* reward* benefit* bonus* gain*",
    "risk": "danger* risk* safe safety caution* avoid* warning*",
    "time": "today tomorrow yesterday now then when soon later day days week* month* year* hour* morning* night* tonight",
    "work": "work* job* career* office* employ* boss* class school* study* project*",
    "leisure": "game* play* movie* music* tv party* book* sport* travel* vacation*",
    "money": "money cash pay* paid dollar* price* cost* rent bank* budget* buy* bought spend* spent",
    "relig": "god church* pray* faith* relig* bible* jesus sin sins sinful holy heaven* spirit*",
    "death": "death* dead die died dying funeral* grave* kill* suicid*",
    "swear": "damn hell shit* fuck* crap ass bitch*",
    "netspeak": "lol lmao omg btw idk tbh imo haha* thx",
}

SUMMARIES = [
    {"name": "Authentic", "transform": "logistic100", "intercept": -1.0,
     "weights": {"i": 0.35, "insight": 0.15, "feel": 0.2, "ipron": -0.05, "certain": -0.1, "you": -0.05}},
    {"name": "Clout", "transform": "logistic100", "intercept": 0.0,
     "weights": {"we": 0.4, "you": 0.25, "social": 0.05, "i": -0.3, "negate": -0.1}},
]


def ancestors(cat):
    out = [cat]
    while cat in PARENT:
        cat = PARENT[cat]
        out.append(cat)
    return out


def build_dic():
    ids = {name: i for i, name in enumerate(ORDER, 1)}
    entries = {}
    for leaf, words in WORDS.items():
        for w in words.split():
            entries.setdefault(w, set()).update(ids[c] for c in ancestors(leaf))
    lines = ["%"] + [f"{ids[n]}\t{n}" for n in ORDER] + ["%"]
    for w in sorted(entries):
        lines.append(w + "\t" + "\t".join(str(i) for i in sorted(entries[w])))
    return "\n".join(lines) + "\n"


def build_filler(dic_text, n=400, seed=20180901):
    import sys
    sys.path.insert(0, str(DATA.parents[1]))
    from bpdetect.lexicon import parse_dic

    lex = parse_dic(dic_text)
    rng = random.Random(seed)
    onsets = ["b", "bl", "br", "d", "dr", "f", "fl", "gr", "k", "kl", "m", "n", "p", "pr", "st", "tr", "v", "z", "sn", "gl"]
    nuclei = ["a", "e", "i", "o", "u", "oo", "ea", "ai"]
    codas = ["", "n", "m", "rk", "st", "nd", "x", "lt", "p", "g"]
    words = set()
    while len(words) < n:
        w = "".join(rng.choice(onsets) + rng.choice(nuclei) for _ in range(rng.randint(1, 3))) + rng.choice(codas)
        if 3 <= len(w) <= 10 and not lex.match(w) and w not in {"bipolar", "bp"}:
            words.add(w)
    return sorted(words)


if __name__ == "__main__":
    dic = build_dic()
    (DATA / "demo.dic").write_text(dic, encoding="utf-8")
    (DATA / "demo_summaries.json").write_text(json.dumps({"summaries": SUMMARIES}, indent=2) + "\n", encoding="utf-8")
    (DATA / "filler.txt").write_text("\n".join(build_filler(dic)) + "\n", encoding="utf-8")
