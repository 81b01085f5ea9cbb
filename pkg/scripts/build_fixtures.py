"""Regenerate src/plansearch/data/fixtures.jsonl.

Each question type gets the appendix gold plan on a scene built to fit it, plus
seeded variants that follow the same template. Scenes are drawn at random and
kept only when the gold plan passes the evaluator.

    python scripts/build_fixtures.py [--seed 7] [--per-type 8]
"""

from __future__ import annotations

import argparse
import json
import random
from pathlib import Path

from plansearch.dataset import STRUCTURES, dump_dataset, record_from_json
from plansearch.dsl import parse_plan
from plansearch.evaluator import evaluate_candidate
from plansearch.interpreter import execute_plan, format_answer
from plansearch.scene import scene_from_document

DATA = Path(__file__).resolve().parents[1] / "src" / "plansearch" / "data"

COLORS = ["gray", "red", "blue", "green", "brown", "purple", "cyan", "yellow"]
WORDS = ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"]
RELATIONS = ["left", "right", "front", "behind"]
SIDE = {"behind": "behind", "front": "in front of", "left": "on the left side of", "right": "on the right side of"}

PTR_PARTS = {
    "chair": ["back", "seat", "leg", "leg bar", "arm vertical bar", "arm horizontal bar", "central support"],
    "table": ["top", "leg", "drawer", "door", "leg bar"],
    "bed": ["sleep area", "leg", "leg bar", "head board"],
    "cart": ["body", "wheel"],
    "refrigerator": ["body", "door"],
}
CLEVR_SHAPES = ["cube", "sphere", "cylinder"]


def plural(part: str) -> str:
    return part if part.endswith("s") else part + "s"


def relations_from_positions(pos: list[tuple[int, int]], vertical: bool) -> dict[str, list[list[int]]]:
    n = len(pos)
    rel = {
        "left": [[j for j in range(n) if pos[j][0] < pos[i][0]] for i in range(n)],
        "right": [[j for j in range(n) if pos[j][0] > pos[i][0]] for i in range(n)],
        "front": [[j for j in range(n) if pos[j][1] < pos[i][1]] for i in range(n)],
        "behind": [[j for j in range(n) if pos[j][1] > pos[i][1]] for i in range(n)],
    }
    if vertical:
        rel["above"] = [[] for _ in range(n)]
        rel["below"] = [[] for _ in range(n)]
    return rel


def ptr_scene(rng: random.Random, objects: list[tuple[str, dict]]) -> dict:
    """``objects`` is a list of (category, {part: [color, count]})."""
    rng.shuffle(objects)
    counters: dict[str, int] = {}
    out = []
    for cat, parts in objects:
        name = f"{cat.capitalize()}{counters.get(cat, 0)}"
        counters[cat] = counters.get(cat, 0) + 1
        out.append({name: parts})
    n = len(out)
    pos = list(zip(rng.sample(range(50), n), rng.sample(range(50), n)))
    return {"relationships": relations_from_positions(pos, True), "objects": out}


def clevr_scene(rng: random.Random, objects: list[tuple[str, list[str]]]) -> dict:
    rng.shuffle(objects)
    counters: dict[str, int] = {}
    out = []
    for shape, attrs in objects:
        name = f"{shape}{counters.get(shape, 0)}"
        counters[shape] = counters.get(shape, 0) + 1
        out.append({name: attrs})
    n = len(out)
    pos = list(zip(rng.sample(range(50), n), rng.sample(range(50), n)))
    return {"relationships": relations_from_positions(pos, False), "objects": out}


def random_ptr_object(rng: random.Random, cat: str | None = None, avoid: set[str] = frozenset()) -> tuple[str, dict]:
    cat = cat or rng.choice(list(PTR_PARTS))
    names = [p for p in PTR_PARTS[cat] if p not in avoid]
    chosen = rng.sample(names, rng.randint(2, min(4, len(names))))
    return cat, {p: [rng.choice(COLORS), rng.randint(1, 4)] for p in chosen}


def random_clevr_object(rng: random.Random) -> tuple[str, list[str]]:
    return rng.choice(CLEVR_SHAPES), [rng.choice(COLORS), rng.choice(["small", "large"]), rng.choice(["rubber", "metal"])]


# -- per-type builders ----------------------------------------------------------
# Each returns (question, plan lines, scene document).


def short_rel(rng, appendix):
    if appendix:
        count, color, part, rel = 6, "red", "drawer", "behind"
    else:
        count, color, part, rel = rng.randint(2, 6), rng.choice(COLORS), rng.choice(["drawer", "door", "leg"]), rng.choice(RELATIONS)
    target = ("table", {part: [color, count], "top": [rng.choice(COLORS), 1]})
    decoy_color = rng.choice([c for c in COLORS if c != color])
    decoy = ("table", {part: [decoy_color, count], "leg": [rng.choice(COLORS), 4]})
    objs = [target, decoy] + [random_ptr_object(rng, rng.choice(["chair", "bed", "cart"])) for _ in range(rng.randint(2, 4))]
    q = f"how many things are {SIDE[rel]} the table with {WORDS[count]} {color} {plural(part)}?"
    plan = [
        'Step 1:obj1 = filter_object("table",all_obj)',
        f'Step 2:obj2 = filter_part(["{WORDS[count]}","{color}","{part}"],obj1)',
        f'Step 3:obj3 = query_relation("{rel}",obj2)',
        "Step 4:ans = count_object(obj3)",
    ]
    return q, plan, ptr_scene(rng, objs)


def long_rel(rng, appendix):
    objs = [random_clevr_object(rng) for _ in range(rng.randint(6, 9))]
    if appendix:
        objs[0] = (rng.choice(CLEVR_SHAPES), ["yellow", "small", "rubber"])
        objs[1] = ("sphere", ["yellow", rng.choice(["small", "large"]), rng.choice(["rubber", "metal"])])
        objs[2] = ("sphere", [rng.choice(COLORS), rng.choice(["small", "large"]), "metal"])
    doc = clevr_scene(rng, objs)
    scene = scene_from_document(doc)
    attrs = [list(o.values())[0] for o in doc["objects"]]
    shapes = [o.category for o in scene.objects]
    rel = doc["relationships"]
    r1, r2, r3 = ("behind", "right", "behind") if appendix else (rng.choice(RELATIONS), rng.choice(RELATIONS), rng.choice(RELATIONS))
    for a in rng.sample(range(len(attrs)), len(attrs)):
        triple = attrs[a]
        if sum(1 for t in attrs if t == triple) != 1 or len(rel[r1][a]) != 1:
            continue
        b = rel[r1][a][0]
        spheres = [j for j in rel[r2][b] if shapes[j] == "sphere"]
        if len(spheres) != 1:
            continue
        c = spheres[0]
        behind_spheres = [j for j in rel[r3][c] if shapes[j] == "sphere"]
        for d in behind_spheres:
            color = attrs[d][0]
            if appendix and (triple != ["yellow", "small", "rubber"] or color != "yellow"):
                continue
            if sum(1 for j in behind_spheres if attrs[j][0] == color) == 1:
                size_word = {"small": "tiny", "large": "big"}[triple[1]] if appendix else triple[1]
                mat_word = {"rubber": "matte", "metal": "shiny"}[triple[2]] if appendix else triple[2]
                q = (
                    f"What size is the {color} ball {SIDE[r3]} the sphere that is {SIDE[r2]} the object that is "
                    f"{SIDE[r1]} the {size_word} {triple[0]} {mat_word} thing?"
                )
                plan = [
                    f'Step 1:obj1 = filter_part(["{size_word}","{triple[0]}","{mat_word}"],all_obj)',
                    f'Step 2:obj2 = query_relation("{r1}",obj1)',
                    f'Step 3:obj3 = query_relation("{r2}",obj2)',
                    'Step 4:obj4 = filter_object("sphere",obj3)',
                    f'Step 5:obj5 = query_relation("{r3}",obj4)',
                    'Step 6:obj6 = filter_object("ball",obj5)',
                    f'Step 7:obj7 = filter_part(["{color}"],obj6)',
                    "Step 8:ans = query_size(obj7)",
                ]
                return q, plan, doc
    return None


def sum_(rng, appendix):
    c1, c2 = ("cyan", "blue") if appendix else rng.sample(COLORS, 2)
    n2 = 2 if appendix else rng.randint(1, 4)
    t1 = ("table", {"leg": [c1, rng.randint(3, 4)], "drawer": [rng.choice(COLORS), rng.randint(1, 6)], "top": [rng.choice(COLORS), 1]})
    t2 = ("table", {"leg": [c2, n2], "door": [rng.choice(COLORS), rng.randint(1, 3)], "top": [rng.choice(COLORS), 1]})
    objs = [t1, t2] + [random_ptr_object(rng, rng.choice(["chair", "bed", "refrigerator"])) for _ in range(rng.randint(1, 3))]
    q = (
        f"what is the sum of the number of drawers in the table with {c1} legs, and the number of doors "
        f"in the table with {WORDS[n2]} {c2} legs?"
    )
    plan = [
        'Step 1:obj1 = filter_object("table",all_obj)',
        f'Step 2:obj2 = filter_part(["{c1}", "leg"],obj1)',
        'Step 3:num1 = count_part("drawer",obj2)',
        'Step 4:obj3 = filter_object("table",all_obj)',
        f'Step 5:obj4 = filter_part(["{WORDS[n2]}","{c2}","leg"],obj3)',
        'Step 6:num2 = count_part("door",obj4)',
        "Step 7:ans = sum(num1,num2)",
    ]
    return q, plan, ptr_scene(rng, objs)


def compare(rng, appendix):
    body = "cyan" if appendix else rng.choice(COLORS)
    bar = "red" if appendix else rng.choice(COLORS)
    wheels = rng.randint(2, 4)
    legs = wheels if appendix or rng.random() < 0.4 else rng.randint(2, 4)
    cart = ("cart", {"body": [body, 1], "wheel": [rng.choice(COLORS), wheels]})
    other_cart = ("cart", {"body": [rng.choice([c for c in COLORS if c != body]), 1], "wheel": [rng.choice(COLORS), 4]})
    holder = ("chair", {"leg bar": [bar, 3], "leg": [rng.choice(COLORS), legs], "seat": [rng.choice(COLORS), 1]})
    extra = [random_ptr_object(rng, rng.choice(["table", "bed"]), avoid={"leg bar"}) for _ in range(rng.randint(1, 2))]
    objs = [cart, other_cart, holder] + extra
    op = "equal" if appendix else rng.choice(["equal", "more_than", "few_than"])
    lead = {
        "equal": "are there an equal number of",
        "more_than": "are there more",
        "few_than": "are there fewer",
    }[op]
    joiner = ", and" if op == "equal" else " than"
    q = f"{lead} wheels in the cart with a {body} body{joiner} legs in the object with three {bar} leg bars?"
    plan = [
        'Step 1:obj1 = filter_object("cart",all_obj)',
        f'Step 2:obj2 = filter_part(["one","{body}","body"],obj1)',
        'Step 3:num1 = count_part("wheel",obj2)',
        f'Step 4:obj3 = filter_part(["{bar}","leg bar"],all_obj)',
        'Step 5:num2 = count_part("leg",obj3)',
        f"Step 6:ans = {op}(num1,num2)",
    ]
    return q, plan, ptr_scene(rng, objs)


def logic(rng, appendix):
    objs = [random_clevr_object(rng) for _ in range(rng.randint(6, 9))]
    if appendix:
        objs[0] = ("cube", ["red", "small", "rubber"])
        objs[1] = ("cylinder", ["green", "large", "metal"])
    doc = clevr_scene(rng, objs)
    scene = scene_from_document(doc)
    attrs = [list(o.values())[0] for o in doc["objects"]]
    rel = doc["relationships"]
    r1, r2 = ("right", "front") if appendix else rng.sample(RELATIONS, 2)

    def unique_desc(i, k):
        # k leading attributes of (size, color, material) that single out object i
        color, size, material = attrs[i]
        words = [size, color, material][:k]
        keys = [1, 0, 2][:k]
        hits = [j for j in range(len(attrs)) if all(attrs[j][kk] == w for kk, w in zip(keys, words))]
        return words if hits == [i] else None

    order = list(range(len(attrs)))
    rng.shuffle(order)
    for a in order:
        da = unique_desc(a, 2)
        if not da:
            continue
        for g in order:
            dg = unique_desc(g, 3)
            if g == a or not dg:
                continue
            both = sorted(set(rel[r1][a]) & set(rel[r2][g]))
            if not both:
                continue
            for slot, idx in (("material", 2), ("size", 1)):
                for m in both:
                    word = attrs[m][idx]
                    if [j for j in both if attrs[j][idx] == word] == [m]:
                        q = (
                            f"The {word} object that is both {SIDE[r1]} the {da[0]} {da[1]} thing and "
                            f"{SIDE[r2]} the {dg[0]} {dg[1]} {dg[2]} thing is what color?"
                        )
                        plan = [
                            f'Step 1:obj1 = filter_part(["{da[0]}","{da[1]}"],all_obj)',
                            f'Step 2:obj2 = query_relation("{r1}",obj1)',
                            f'Step 3:obj3 = filter_part(["{dg[0]}","{dg[1]}","{dg[2]}"],all_obj)',
                            f'Step 4:obj4 = query_relation("{r2}",obj3)',
                            "Step 5:obj5 = intersection(obj2,obj4)",
                            f'Step 6:obj6 = filter_part(["{word}"],obj5)',
                            "Step 7:ans = query_color(obj6)",
                        ]
                        if appendix and (da != ["small", "red"] or dg != ["large", "green", "metal"] or word != "metal"):
                            continue
                        return q, plan, doc
    return None


def query_part(rng, appendix):
    leg = "blue" if appendix else rng.choice(COLORS)
    asked = "brown" if appendix else rng.choice([c for c in COLORS if c != leg])
    cat = "table" if appendix else rng.choice(["chair", "table", "bed"])
    asked_part = rng.choice([p for p in PTR_PARTS[cat] if p != "leg"])
    x = (cat, {"leg": [leg, 4], asked_part: [rng.choice(COLORS), 1]})
    y_parts = {asked_part: [asked, rng.randint(1, 2)]}
    for p in rng.sample([p for p in PTR_PARTS[cat] if p not in (asked_part, "leg")], 2):
        y_parts[p] = [rng.choice([c for c in COLORS if c != asked]), rng.randint(1, 4)]
    y_parts["leg"] = [rng.choice([c for c in COLORS if c not in (asked, leg)]), 4]
    y = (cat, y_parts)
    others = []
    while len(others) < rng.randint(1, 3):
        o = random_ptr_object(rng, rng.choice([c for c in PTR_PARTS if c != cat]))
        if o[1].get("leg", [None])[0] != leg:
            others.append(o)
    q = (
        f"what is the category of the {asked} part of the thing that is of the same category as the thing "
        f"with {leg} legs?"
    )
    plan = [
        f'Step 1:obj1 = filter_part(["{leg}","leg"],all_obj)',
        "Step 2:category1 = query_category(obj1)",
        "Step 3:obj2 = filter_category(category1,all_obj)",
        "Step 4:obj3 = exclude_object(obj1,obj2)",
        f'Step 5:ans= query_part("{asked}",obj3)',
    ]
    return q, plan, ptr_scene(rng, [x, y] + others)


def exist(rng, appendix):
    back = "red" if appendix else rng.choice(COLORS)
    bars = rng.randint(1, 4)
    c = ("chair", {"back": [back, 1], "leg bar": [rng.choice(COLORS), bars], "seat": [rng.choice(COLORS), 1]})
    c2 = ("chair", {"back": [rng.choice([x for x in COLORS if x != back]), 1], "leg": [rng.choice(COLORS), 4]})
    want_yes = rng.random() < 0.5
    other_bars = bars if want_yes else rng.choice([n for n in range(1, 5) if n != bars])
    third = (rng.choice(["table", "bed"]), {"leg bar": [rng.choice(COLORS), other_bars], "leg": [rng.choice(COLORS), 4]})
    objs = [c, c2, third] + [random_ptr_object(rng, "cart")]
    q = f"are there any objects that have the same number of leg bars as the chair with one {back} back?"
    plan = [
        'Step 1:obj1 = filter_object("chair",all_obj)',
        f'Step 2:obj2 = filter_part(["one","{back}","back"],obj1)',
        'Step 3:num1 = count_part("leg bar",obj2)',
        'Step 4:obj3 = filter_part([num1,"leg bar"],all_obj)',
        "Step 5:obj4 = exclude_object(obj2,obj3)",
        "Step 6:ans = exist(obj4)",
    ]
    return q, plan, ptr_scene(rng, objs)


def count(rng, appendix):
    bars = 3 if appendix else rng.randint(1, 4)
    seat = rng.choice(COLORS)
    c = ("chair", {"leg bar": [rng.choice(COLORS), bars], "seat": [seat, 1], "leg": [rng.choice(COLORS), 4]})
    c2 = ("chair", {"leg bar": [rng.choice(COLORS), rng.choice([n for n in range(1, 5) if n != bars])],
                    "seat": [rng.choice([x for x in COLORS if x != seat]), 1]})
    d = (rng.choice(["chair", "table"]), {"seat": [seat, 1], "leg": [rng.choice(COLORS), rng.randint(3, 6)]})
    objs = [c, c2, d] + [random_ptr_object(rng, rng.choice(["cart", "bed"]))]
    q = f"what is the number of the legs of the thing that has the same color of seat as the chair with {WORDS[bars]} leg bars?"
    plan = [
        'Step 1:obj1 = filter_object("chair",all_obj)',
        f'Step 2:obj2 = filter_part(["{WORDS[bars]}","leg bar"],obj1)',
        'Step 3:color1 = query_color("seat",obj2)',
        'Step 4:obj3 = filter_part([color1,"seat"],all_obj)',
        "Step 5:obj4 = exclude_object(obj2,obj3)",
        'Step 6:ans = count_part("leg",obj4)',
    ]
    return q, plan, ptr_scene(rng, objs)


def analogy(rng, appendix):
    c1, c2 = ("purple", "green") if appendix else rng.sample(COLORS, 2)
    bars = 8 if appendix else rng.randint(5, 8)
    b1 = ("bed", {"sleep area": [c1, 1], "leg": [rng.choice(COLORS), 4]})
    b2 = ("bed", {"sleep area": [c2, 1], "head board": [rng.choice(COLORS), 1]})
    x = (rng.choice(["table", "chair"]), {"leg bar": [rng.choice(COLORS), bars], "leg": [rng.choice(COLORS), 4]})
    others = [random_ptr_object(rng, rng.choice(["chair", "cart", "refrigerator"]), avoid={"leg bar"}) for _ in range(rng.randint(1, 3))]
    final = "count_object" if appendix else rng.choice(["count_object", "exist"])
    tail = (
        "how many objects does the object with {n} leg bars have the same positional relation to?"
        if final == "count_object"
        else "is there an object that the object with {n} leg bars has the same positional relation to?"
    ).format(n=WORDS[bars])
    q = (
        f"the bed with a {c1} sleep area has certain positional relation to the bed with one {c2} sleep area. "
        f"by analogy, {tail}"
    )
    plan = [
        'Step 1:obj1 = filter_object("bed",all_obj)',
        f'Step 2:obj2 = filter_part(["one","{c1}","sleep area"],obj1)',
        'Step 3:obj3 = filter_object("bed",all_obj)',
        f'Step 4:obj4 = filter_part(["one","{c2}","sleep area"],obj3)',
        "Step 5:relation1 = get_relation(obj2,obj4)",
        f'Step 6:obj5 = filter_part(["{WORDS[bars]}","leg bar"],all_obj)',
        "Step 7:obj6= filter_relation(relation1,obj5,all_obj)",
        f"Step 8:ans = {final}(obj6)",
    ]
    return q, plan, ptr_scene(rng, [b1, b2, x] + others)


BUILDERS = {
    "Short Rel": short_rel,
    "Long Rel": long_rel,
    "Sum": sum_,
    "Compare": compare,
    "Logic": logic,
    "Query Part": query_part,
    "Exist": exist,
    "Count": count,
    "Analogy": analogy,
}

SLUG = {t: t.lower().replace(" ", "-") for t in BUILDERS}


def accept(qtype, question, plan_lines, doc, rec_id, split):
    scene = scene_from_document(doc)
    plan = parse_plan("\n".join(plan_lines))
    if not evaluate_candidate(plan, scene).passed:
        return None
    answer = format_answer(execute_plan(plan, scene).answer)
    return record_from_json(
        {
            "id": rec_id,
            "question": question,
            "answer": answer,
            "question_type": qtype,
            "structure": STRUCTURES[qtype],
            "gold_plan": plan_lines,
            "scene": doc,
            "split": split,
        }
    )


def appendix_records():
    """Records built directly on the two appendix scenes, with derived plans."""
    out = []
    for name, qtype, lines in (
        ("appendix_ptr", "Analogy", [
            'Step 1:obj1 = filter_object("chair",all_obj)',
            'Step 2:obj2 = filter_part(["four","brown","arm vertical bar"],obj1)',
            'Step 3:obj3 = filter_part(["gray","leg"],obj1)',
            "Step 4:relation1 = get_relation(obj2,obj3)",
            'Step 5:obj4 = filter_part(["three","blue","leg"],all_obj)',
            "Step 6:obj5 = filter_relation(relation1,obj4,all_obj)",
            "Step 7:ans = query_category(obj5)",
        ]),
        ("appendix_clevr", "Logic", [
            'Step 1:obj1 = filter_part(["purple","shiny"],all_obj)',
            'Step 2:obj2 = query_relation("left",obj1)',
            'Step 3:obj3 = filter_part(["tiny","gray","metallic","ball"],all_obj)',
            'Step 4:obj4 = query_relation("behind",obj3)',
            "Step 5:obj5 = intersection(obj2,obj4)",
            'Step 6:obj6 = filter_part(["large"],obj5)',
            "Step 7:ans = query_color(obj6)",
        ]),
    ):
        doc = json.loads((DATA / f"{name}.json").read_text())
        out.append(record_from_json({
            "id": name.replace("_", "-"),
            "question": doc["question"],
            "answer": doc["answer"],
            "question_type": qtype,
            "structure": STRUCTURES[qtype],
            "gold_plan": lines,
            "scene": {"relationships": doc["relationships"], "objects": doc["objects"]},
        }))
    return out


def build(seed: int, per_type: int):
    rng = random.Random(seed)
    gold = {g["question_type"]: g for g in json.loads((DATA / "appendix_plans.json").read_text())["gold_plans"]}
    records = appendix_records()
    for qtype, builder in BUILDERS.items():
        made = 0
        attempts = 0
        while made < per_type:
            attempts += 1
            if attempts > 20000:
                raise RuntimeError(f"could not build {qtype} fixtures")
            appendix = made == 0
            built = builder(rng, appendix)
            if built is None:
                continue
            question, lines, doc = built
            if appendix:
                # the appendix record keeps the published question and (corrected) plan text
                question, lines = gold[qtype]["question"], gold[qtype]["plan"]
            split = "test" if made < per_type // 2 else "library"
            rec = accept(qtype, question, lines, doc, f"{SLUG[qtype]}-{made:02d}", split)
            if rec is None:
                continue
            records.append(rec)
            made += 1
    return records


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--per-type", type=int, default=8)
    ap.add_argument("--out", type=Path, default=DATA / "fixtures.jsonl")
    args = ap.parse_args()
    records = build(args.seed, args.per_type)
    args.out.write_text(dump_dataset(records), encoding="utf-8")
    print(f"wrote {len(records)} records to {args.out}")


if __name__ == "__main__":
    main()
