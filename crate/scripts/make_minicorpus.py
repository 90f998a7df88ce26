#!/usr/bin/env python3
"""Generate the bundled mini-corpus, its question sets and the web fixture.

Everything is derived from a seeded RNG, so rerunning the script reproduces
the files under data/minicorpus byte for byte.

    python3 scripts/make_minicorpus.py [--out data/minicorpus] [--seed 7]
"""

import argparse
import json
import math
import random
from pathlib import Path

LANDS = ["Corvania", "Elsmark", "Tarsund", "Vellmoor", "Osterling", "Quenby"]
DEMONYM = {
    "Corvania": "Corvanian",
    "Elsmark": "Elsmarkish",
    "Tarsund": "Tarsundic",
    "Vellmoor": "Vellmoorian",
    "Osterling": "Osterlish",
    "Quenby": "Quenbian",
}
FIRST = [
    "Aldric", "Bartholomew", "Celestine", "Dorian", "Elowen", "Fenwick", "Griselda",
    "Hollis", "Isolde", "Jerrold", "Katrin", "Leopold", "Marisol", "Nikolai",
    "Ottoline", "Percival", "Rosalind", "Sebastian", "Theodora", "Ulric", "Valentina",
    "Wendell", "Yvaine", "Zebulon", "Ambrose", "Beatrix", "Cornelius", "Delphine",
    "Evander", "Florentine", "Gideon", "Henrietta", "Ignatius", "Josephine",
    "Lysander", "Mirabel", "Octavian", "Philippa", "Quentin", "Sabine",
]
LAST = [
    "Quillfeather", "Ashgrove", "Brightwater", "Calloway", "Dunmore", "Everhart",
    "Fairweather", "Galbraith", "Holloway", "Ironside", "Kettleby", "Larkspur",
    "Merriweather", "Northcott", "Oakenshield", "Pemberton", "Ravenscroft",
    "Stonebridge", "Thistlewood", "Underhill", "Vantongeren", "Whitlock",
    "Yarborough", "Zellweger", "Abernathy", "Blackwood", "Crowley", "Dewhurst",
    "Elderberry", "Foxworth", "Greenhalgh", "Hawthorne", "Inglewood", "Jessamy",
    "Kingsley", "Lockwood", "Marchbanks", "Nettleton", "Ormsby", "Prendergast",
]
CITY_A = ["Port", "North", "Old", "East", "West", "Upper", "Lower", "New"]
CITY_B = [
    "Harrowgate", "Mistral", "Velden", "Carrick", "Solace", "Brennan", "Ysolde",
    "Tamsin", "Corrin", "Aldwick", "Fennmoor", "Graythorn", "Hallow", "Ivel",
    "Jorvik", "Kestrel", "Lindum", "Marrow", "Norwood", "Oriel", "Pellam",
    "Quarry", "Rowan", "Saltmarsh", "Tinley",
]
RIVERS = [
    "Aske", "Brenn", "Calder", "Dovey", "Esk", "Frome", "Glaven", "Hodder",
    "Irthing", "Kennet", "Lune", "Medway", "Nidd", "Ouse", "Parrett",
]
ADJ = [
    "Amber", "Silent", "Crimson", "Hollow", "Gilded", "Winter", "Broken", "Distant",
    "Emerald", "Forgotten", "Burning", "Iron", "Velvet", "Lantern", "Copper",
    "Silver", "Wandering", "Sleeping", "Scarlet", "Ivory", "Midnight", "Salt",
    "Thorn", "Glass", "Paper", "Northern", "Quiet", "Golden", "Ashen", "Autumn",
    "Bitter", "Drowned", "Painted", "Stolen", "Twelfth", "Violet", "Weeping",
    "Whispering", "Lonely", "Hidden",
]
NOUN = [
    "Orchard", "Harbor", "Cathedral", "Meadow", "Lighthouse", "Carousel", "Garden",
    "Staircase", "Regatta", "Vineyard", "Observatory", "Bridge", "Fountain",
    "Procession", "Tapestry", "Pavilion", "Ferry", "Monastery", "Mill", "Citadel",
    "Market", "Orchestra", "Masquerade", "Foundry", "Menagerie", "Balcony",
    "Conservatory", "Aqueduct", "Windmill", "Archipelago", "Caravan", "Bazaar",
    "Chapel", "Armada", "Library", "Tavern", "Quarry", "Canal", "Glacier", "Kiln",
]

TOPICS = {
    "painter": {
        "art": "painting",
        "work": "painting",
        "verb": "painted",
        "shows": "depicts",
        "made": "canvas",
        "words": ["brushwork", "pigment", "canvas", "easel", "landscape", "portrait",
                  "fresco", "gallery", "exhibition", "varnish", "studio", "palette"],
    },
    "composer": {
        "art": "music",
        "work": "symphony",
        "verb": "composed",
        "shows": "evokes",
        "made": "score",
        "words": ["orchestra", "overture", "sonata", "conductor", "concerto",
                  "choir", "melody", "harmony", "premiere", "libretto", "quartet", "tempo"],
    },
    "novelist": {
        "art": "literature",
        "work": "novel",
        "verb": "wrote",
        "shows": "tells of",
        "made": "manuscript",
        "words": ["publisher", "chapter", "narrator", "serialised", "manuscript",
                  "critics", "readers", "prose", "trilogy", "sequel", "bestseller", "edition"],
    },
    "explorer": {
        "art": "exploration",
        "work": "expedition",
        "verb": "led",
        "shows": "charted",
        "made": "voyage",
        "words": ["voyage", "sledge", "navigator", "cartographer", "coastline",
                  "survey", "crew", "schooner", "icefield", "compass", "sextant", "charts"],
    },
}
KINDS = list(TOPICS)

GENERIC = [
    "The archive holds letters, ledgers and drawings from the period.",
    "Later historians disagreed about the importance of this episode.",
    "A memorial plaque was unveiled in the town square many years afterwards.",
    "Several biographies were published in the following century.",
    "Records from the parish register survive in the regional archive.",
    "The family later moved inland to escape the winter storms.",
    "Contemporary newspapers covered the events in considerable detail.",
    "A small museum now occupies part of the original building.",
    "Scholars continue to debate the dating of the surviving sketches.",
    "The correspondence was catalogued by the national library.",
]


SYLL = ["ar", "bel", "cor", "dun", "el", "fen", "gar", "hol", "is", "jor", "kel",
        "lor", "mar", "nor", "ost", "pel", "quin", "ros", "sel", "tor", "ul", "val",
        "wen", "yar", "zen", "bra", "cra", "dro", "fla", "gri"]


def plural(noun):
    if noun.endswith("y") and noun[-2] not in "aeiou":
        return noun[:-1] + "ies"
    if noun.endswith(("s", "x", "ch", "sh")):
        return noun + "es"
    return noun + "s"


class Gen:
    def __init__(self, seed):
        self.r = random.Random(seed)
        self.docs = []          # list of dicts: title, text
        self.redirects = []     # (alias, target)
        self.views = {}
        self.questions = []

    def pick(self, seq):
        return self.r.choice(seq)

    def sample(self, seq, k):
        return self.r.sample(seq, k)

    def filler(self, n):
        return " ".join(self.sample(GENERIC, n))

    def build(self):
        r = self.r
        firsts = self.sample(FIRST, 40)
        lasts = self.sample(LAST, 40)
        cities = []
        used = set()
        while len(cities) < 25:
            c = f"{self.pick(CITY_A)} {self.pick(CITY_B)}"
            b = c.split()[1]
            if b not in used:
                used.add(b)
                cities.append(c)
        rivers = [f"River {n}" for n in RIVERS]
        city_land = {c: self.pick(LANDS) for c in cities}
        city_river = {c: self.pick(rivers) for c in cities}

        work_titles = []
        seen = set()
        while len(work_titles) < 40:
            t = f"The {self.pick(ADJ)} {self.pick(NOUN)}"
            if t not in seen:
                seen.add(t)
                work_titles.append(t)

        people = []
        for i in range(40):
            kind = KINDS[i % 4]
            city = cities[i % 25]
            people.append({
                "name": f"{firsts[i]} {lasts[i]}",
                "first": firsts[i],
                "last": lasts[i],
                "kind": kind,
                "city": city,
                "land": city_land[city],
                "born": 1700 + r.randrange(0, 180),
                "work": work_titles[i],
                "teacher": None,
            })
        for i, p in enumerate(people):
            p["died"] = p["born"] + r.randrange(38, 85)
            p["year"] = p["born"] + r.randrange(22, 36)
            p["theme"] = self.pick(ADJ).lower() + " " + plural(self.pick(NOUN).lower())
            same = [q for q in people if q["kind"] == p["kind"] and q is not p]
            p["teacher"] = same[i % len(same)]["name"]
            p["prize"] = f"{self.pick(LAST)} Medal"
            p["nick"] = None
        # a quarter of the people go by a shorter name that has its own redirect
        for p in people[::2]:
            p["nick"] = f"{p['first'][0]}. {p['last']}"

        self.people = people
        self.cities = cities
        self.city_land = city_land
        self.city_river = city_river
        self.rivers = rivers

        for p in people:
            self.person_doc(p)
            self.work_doc(p)
        for c in cities:
            self.city_doc(c)
        for rv in rivers:
            self.river_doc(rv)
        for land in LANDS:
            self.land_doc(land)
        for kind in KINDS:
            for land in LANDS[:4]:
                self.survey_doc(kind, land)
        self.stub_docs(work_titles)
        self.popular_distractors()
        self.voyages()
        self.make_questions()

    def add(self, title, text, views):
        self.docs.append({"title": title, "text": text})
        self.views[title] = views

    def person_doc(self, p):
        t = TOPICS[p["kind"]]
        w = self.sample(t["words"], 6)
        nick = ""
        if p["nick"]:
            nick = f" {p['name']}, widely known as {p['nick']},"
        body = (
            f"{p['name']} ({p['born']}–{p['died']}) was a {DEMONYM[p['land']]} {p['kind']} "
            f"born in {p['city']}.{nick} {p['last']} studied {t['art']} under {p['teacher']} "
            f"and worked for most of a career in {p['land']}. "
            f"In {p['year']} {p['last']} {t['verb']} {p['work']}, a {t['work']} about {p['theme']}, "
            f"which made the name famous. Critics praised the {w[0]} and the {w[1]}. "
            f"{p['last']} received the {p['prize']} and spent the final years in {p['city']}. "
            f"{self.filler(2)}"
        )
        self.add(p["name"], body, int(self.r.lognormvariate(8, 1.2)))
        if p["nick"]:
            self.redirects.append((p["nick"], p["name"]))
        self.redirects.append((f"{p['last']}, {p['first']}", p["name"]))

    def work_doc(self, p):
        t = TOPICS[p["kind"]]
        w = self.sample(t["words"], 8)
        body = (
            f"{p['work']} is a {t['work']} by the {DEMONYM[p['land']]} {p['kind']} {p['name']}, "
            f"completed in {p['year']}. It {t['shows']} {p['theme']} near {p['city']}. "
            f"The {w[0]} and {w[1]} were unusual for the time, and the {w[2]} drew large crowds. "
            f"A later {w[3]} revived interest in the {t['work']}. "
            f"Today it is regarded as a landmark of {DEMONYM[p['land']]} {t['art']}. "
            f"{self.filler(1)}"
        )
        self.add(p["work"], body, int(self.r.lognormvariate(7, 1.3)))

    def city_doc(self, c):
        land = self.city_land[c]
        natives = [p for p in self.people if p["city"] == c]
        names = ", ".join(p["name"] for p in natives) or "several merchants"
        crafts = self.sample(["shipbuilding", "weaving", "glassmaking", "brewing",
                              "printing", "clockmaking", "tanning", "salt panning"], 2)
        body = (
            f"{c} is a town in {land} on the banks of the {self.city_river[c]}. "
            f"Its economy grew on {crafts[0]} and {crafts[1]}. "
            f"Notable people born in {c} include {names}. "
            f"The town hall dates from the {self.r.randrange(14, 19)}th century. "
            f"{self.filler(2)}"
        )
        self.add(c, body, int(self.r.lognormvariate(7.5, 1.0)))

    def river_doc(self, rv):
        towns = [c for c in self.cities if self.city_river[c] == rv]
        body = (
            f"The {rv} is a river that rises in the hills and flows to the sea. "
            + (f"Towns on the {rv} include {', '.join(towns)}. " if towns else "")
            + f"The river is {self.r.randrange(40, 400)} kilometres long. {self.filler(1)}"
        )
        self.add(rv, body, int(self.r.lognormvariate(6, 1.0)))

    def land_doc(self, land):
        people = [p for p in self.people if p["land"] == land]
        parts = [f"{land} is a country whose culture is known for painting, music, literature and exploration."]
        for p in people:
            t = TOPICS[p["kind"]]
            parts.append(
                f"The {p['kind']} {p['name']} from {p['city']} {t['verb']} {p['work']}."
            )
        parts.append(self.filler(3))
        self.add(land, " ".join(parts), int(self.r.lognormvariate(9, 0.8)))

    def survey_doc(self, kind, land):
        """Long overview articles that mention many works and names."""
        t = TOPICS[kind]
        people = [p for p in self.people if p["kind"] == kind]
        title = f"{DEMONYM[land]} {t['art']}"
        parts = [f"{title} covers the {t['art']} of {land} and its neighbours."]
        for p in people:
            w = self.sample(t["words"], 3)
            parts.append(
                f"{p['name']} of {p['city']} is remembered for {p['work']}, "
                f"praised for its {w[0]}, {w[1]} and {w[2]}, and for its treatment of {p['theme']}."
            )
            parts.append(
                f"Students of {p['teacher']} often imitated the {t['work']}s of the {p['land']} school."
            )
        parts.append(self.filler(4))
        self.add(title, " ".join(parts), int(self.r.lognormvariate(6.5, 1.0)))

    def stub_docs(self, work_titles):
        """Short pages sharing words with the works: disambiguation-style stubs."""
        for noun in sorted({t.split()[2] for t in work_titles})[:30]:
            adjs = [t.split()[1] for t in work_titles if t.split()[2] == noun]
            kind = self.pick(KINDS)
            body = (
                f"A {noun.lower()} is a structure or place. "
                f"In {TOPICS[kind]['art']}, the {noun.lower()} is a common subject"
                + (f", as in works described as {' or '.join(a.lower() for a in adjs)}" if adjs else "")
                + f". {self.pick(GENERIC)}"
            )
            self.add(f"{noun} (subject)", body, int(self.r.lognormvariate(5, 1.0)))

    def popular_distractors(self):
        """A few very popular generic pages."""
        for name, text in [
            ("Art museum", "An art museum keeps paintings, sculpture and prints. A gallery shows each exhibition for a season."),
            ("Opera house", "An opera house is a theatre for opera. The orchestra sits in a pit below the stage and the conductor faces the singers."),
            ("Printing press", "The printing press made books cheap. Publishers printed novels in cheap editions for new readers."),
            ("Polar exploration", "Polar exploration covers voyages to the Arctic and Antarctic. Crews used sledges, schooners and charts to survey the icefields."),
        ]:
            self.add(name, text, int(self.r.lognormvariate(10, 0.5)))

    def word(self, syllables=2):
        w = "".join(self.pick(SYLL) for _ in range(syllables))
        return w.capitalize()

    def fresh_words(self, n, syllables=2):
        out = []
        while len(out) < n:
            w = self.word(syllables)
            if w not in self.used_words:
                self.used_words.add(w)
                out.append(w)
        return out

    def voyages(self):
        """Long ship's logs, short landmark stubs and a few harbour inns.

        The logs are long and varied; each repeats the names of the inns
        and their harbours. Landmark stubs are short and mention a single
        place that appears once in one log.
        """
        self.used_words = set()
        ships = self.fresh_words(14, 3)
        inns = [(a, b) for a, b in zip(self.fresh_words(3), self.fresh_words(3))]
        goods = ["salt", "timber", "furs", "tea", "cloth", "copper", "wine", "rope",
                 "tallow", "wool", "amber", "pepper"]
        verbs = ["anchored off", "sighted", "passed", "sheltered at", "took water at",
                 "traded at", "surveyed", "rounded", "charted", "landed at"]
        self.voyage_questions = []
        for i, ship in enumerate(ships):
            places = self.fresh_words(60)
            lines = [f"The {ship} was a merchant brig whose log survives in the harbour archive."]
            for d, place in enumerate(places):
                lines.append(
                    f"Day {d + 1}: the crew {self.pick(verbs)} {place} and loaded "
                    f"{self.pick(goods)} for {self.word()} of {self.word()}."
                )
                if d % 12 == 5:
                    for inn, harbour in inns:
                        if (i + inns.index((inn, harbour))) % 14 < 12:
                            lines.append(f"The master dined at the {inn} inn in {harbour}.")
            title = f"Log of the {ship}"
            self.add(title, " ".join(lines), int(self.r.lognormvariate(4, 0.6)))
            if i < 3:
                marks = self.sample(places, 3)
                for m in marks:
                    for kind in ["Point", "Light", "Reef", "Inn"]:
                        self.add(f"{m} {kind}", f"{m} {kind} is a {kind.lower()} named after {m}.",
                                 int(self.r.lognormvariate(3, 0.5)))
                self.voyage_questions.append({
                    "question": f"The crew of this brig passed {marks[0]}, {marks[1]} and {marks[2]}.",
                    "answer": title,
                })
        for inn, harbour in inns:
            title = f"{inn} Inn"
            self.add(title, f"The {inn} inn stands in {harbour}.", int(self.r.lognormvariate(4, 0.6)))
            self.voyage_questions.append({
                "question": f"Where did the master dine in {harbour}? The {inn} inn.",
                "answer": title,
            })

    def make_questions(self):
        qs = list(self.voyage_questions)
        r = self.r
        for i, p in enumerate(self.people):
            t = TOPICS[p["kind"]]
            style = i % 5
            if style == 0:
                q = f"Which {DEMONYM[p['land']]} {p['kind']} {t['verb']} {p['work']}?"
                gold = p["nick"] or p["name"]
            elif style == 1:
                q = f"This {t['work']} by {p['name']} {t['shows']} {p['theme']}."
                gold = p["work"]
            elif style == 2:
                q = f"Born in {p['city']}, this {p['kind']} studied under {p['teacher']} and received the {p['prize']}."
                gold = p["nick"] or p["name"]
            elif style == 3:
                q = f"{p['name']} was born in this town on the {self.city_river[p['city']]}."
                gold = p["city"]
            else:
                adj, noun = p["work"].split()[1:3]
                q = f"The ___ {noun}"
                gold = adj
            qs.append({"question": q, "answer": gold})
        # a few about places
        for rv in self.rivers:
            towns = [c for c in self.cities if self.city_river[c] == rv]
            if not towns:
                continue
            c = towns[0]
            qs.append({
                "question": f"This town in {self.city_land[c]} lies on the {rv}.",
                "answer": c,
            })
            if len(qs) >= 50:
                break
        r.shuffle(qs)
        self.questions = qs[:50]

    def records(self):
        out = [{"title": d["title"], "text": d["text"], "redirect": None} for d in self.docs]
        for alias, target in self.redirects:
            out.append({"title": alias, "text": "", "redirect": target})
        self.r.shuffle(out)
        return out


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/minicorpus")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    g = Gen(args.seed)
    g.build()
    write_jsonl(out / "corpus.jsonl", g.records())
    with open(out / "pageviews.tsv", "w", encoding="utf-8") as f:
        for title in sorted(g.views):
            f.write(f"{title}\t{g.views[title]}\n")
    write_jsonl(out / "questions.jsonl", g.questions)
    write_jsonl(out / "train.jsonl", g.questions[:40])
    write_jsonl(out / "heldout.jsonl", g.questions[40:])

    # Canned web results for the first few held-out questions: the gold
    # document first, then two popular distractors.
    by_title = {d["title"]: d for d in g.docs}
    alias = dict(g.redirects)
    web = []
    for q in g.questions[40:45]:
        gold_title = alias.get(q["answer"], q["answer"])
        hits = []
        if gold_title in by_title:
            hits.append({"title": gold_title, "text": by_title[gold_title]["text"][:160]})
        for t in ["Art museum", "Opera house"]:
            hits.append({"title": t, "text": by_title[t]["text"]})
        web.append({"query_terms": [q["question"]], "results": hits})
    write_jsonl(out / "webmock.jsonl", web)
    print(f"{len(g.docs)} documents, {len(g.redirects)} redirects, {len(g.questions)} questions")


if __name__ == "__main__":
    main()
