#!/usr/bin/env python3
"""Regenerate the bundled evaluation datasets and scripted fixtures.

Writes into src/chatedit/data/eval/. Everything is deterministic; rerunning
produces identical files. The single-task fixture is constructed to succeed
on exactly 45 of 50 cases (in both hierarchical and flat modes), the
dual-task fixture likewise; the ablation set carries five leaf-only cases
marked for the format-discipline wrapper.
"""

from __future__ import annotations

import json
from pathlib import Path

from chatedit.parsing import ParsedResponse, render_canonical

OUT = Path(__file__).resolve().parent.parent / "src" / "chatedit" / "data" / "eval"

RETRY_MATCH = "did not follow the required format"

# Analysis sentence patterns, rotated per case for natural variety.
_PATTERNS = [
    "You want {goal}. {fn} handles exactly that, so I will apply it.",
    "The request is about {goal}; the best match in the library is {fn}.",
    "To get {goal}, I suggest using {fn} — it is designed for this.",
    "{fn} is the right choice here because you asked for {goal}.",
    "I read this as {goal}, which maps to {fn}. Applying it now.",
    "For {goal} the library offers {fn}; that is what I will run.",
]


def analysis(index: int, names: list[str], goal: str) -> str:
    pattern = _PATTERNS[index % len(_PATTERNS)]
    return pattern.format(fn=" and ".join(names), goal=goal)


def reply(names: list[str], text: str) -> str:
    return render_canonical(ParsedResponse(tuple(names), text))


# --- single-task cases -------------------------------------------------------
#
# (instruction, main, sub, goal). sub=None for leaf mains; expected leaf is
# sub or main.

SINGLE_CASES = [
    ("make my skin brighter please", "Whiten Skin", None, "a brighter skin tone"),
    ("my face looks a bit dark, lighten it up", "Whiten Skin", None, "lighter skin"),
    ("can you give me a fairer complexion", "Whiten Skin", None, "a fairer complexion"),
    ("brighten up my skin tone a little", "Whiten Skin", None, "a slightly brighter skin tone"),
    ("i want my skin one shade lighter", "Whiten Skin", None, "skin one shade lighter"),
    ("give me a tanned look", "Darken Skin", None, "a tanned look"),
    ("make my skin a bit darker", "Darken Skin", None, "darker skin"),
    ("i want a sun-kissed skin tone", "Darken Skin", None, "a sun-kissed tone"),
    ("darken my complexion slightly", "Darken Skin", None, "a slightly darker complexion"),
    ("remove the trash can behind me", "Object Removal", None, "the trash can gone"),
    ("get rid of the stranger in the background", "Object Removal", None, "the stranger removed"),
    ("delete the power lines from the sky", "Object Removal", None, "the power lines removed"),
    ("erase the coffee cup on the table", "Object Removal", None, "the coffee cup erased"),
    ("can you remove the car parked on the left", "Object Removal", None, "the car removed"),
    ("take out the photobomber please", "Object Removal", None, "the photobomber removed"),
    ("keep only the cat and wipe out the rest", "Object Retention", None, "only the cat kept"),
    ("isolate the birthday cake from the background", "Object Retention", None, "the cake isolated"),
    ("cut out everything except my dog", "Object Retention", None, "only the dog kept"),
    ("can u open my eyes", "Open Eyes", None, "your eyes opened"),
    ("my eyes are closed in this shot, fix that", "Open Eyes", None, "your eyes opened"),
    ("i blinked, make my eyes open", "Open Eyes", None, "open eyes"),
    ("open his eyes please", "Open Eyes", None, "his eyes opened"),
    ("both of us blinked, open our eyes", "Open Eyes", None, "both pairs of eyes opened"),
    ("enhance the photo quality", "Image Enhancement", None, "better photo quality"),
    ("this picture is blurry, make it clearer", "Image Enhancement", None, "a clearer picture"),
    ("improve the overall quality", "Image Enhancement", None, "improved overall quality"),
    ("make this old photo look better", "Image Enhancement", None, "the old photo improved"),
    ("sharpen it up and fix the contrast", "Image Enhancement", None, "sharper detail and contrast"),
    ("the image looks washed out, enhance it", "Image Enhancement", None, "a richer-looking image"),
    ("can you make this look more professional", "Image Enhancement", None, "a more polished look"),
    ("upscale the quality of this shot", "Image Enhancement", None, "higher quality"),
    ("i want an orange lipstick", "Lipstick Coloring", "Pure Orange", "orange lipstick"),
    ("paint my lips a classic red", "Lipstick Coloring", "Pure Red", "classic red lips"),
    ("give me a dark plum lip", "Lipstick Coloring", "Deep Plum", "a dark plum lip"),
    ("something nude for my lips, very natural", "Lipstick Coloring", "Nude Beige", "a natural nude lip"),
    ("a soft pink lipstick please", "Lipstick Coloring", "Rose Pink", "a soft pink lip"),
    ("i'd like a coral shade on my lips", "Lipstick Coloring", "Coral", "a coral lip"),
    ("lipstick in a smoky tomato red", "Lipstick Coloring", "Burnt Tomato", "a smoky tomato-red lip"),
    ("make the photo black and white", "Photo Filters", "Grayscale", "a black and white photo"),
    ("turn this into an old brown-toned photograph", "Photo Filters", "Sepia", "an old brown-toned look"),
    ("make the photo vintage", "Photo Filters", "Vintage", "a vintage look"),
    ("give it a warm sunset feel", "Photo Filters", "Warm", "a warm sunset feel"),
    ("cool the colors down", "Photo Filters", "Cool", "cooler colors"),
    ("i want that retro faded film look", "Photo Filters", "Vintage", "a faded film look"),
    ("make it monochrome", "Photo Filters", "Grayscale", "a monochrome photo"),
    ("add a cozy golden tint", "Photo Filters", "Warm", "a golden tint"),
    ("I want bigger eyes", "Face Shaping", "Enlarge Eyes", "bigger eyes"),
    ("make my eyes look larger", "Face Shaping", "Enlarge Eyes", "larger-looking eyes"),
    ("increase the space between my eyes", "Face Shaping", "Widen Eye Distance", "wider eye spacing"),
    ("slim down my face shape", "Face Shaping", "Slim Face", "a slimmer face"),
]

# index -> failure mode for the single-task script (exactly five).
SINGLE_FAILURES = {
    2: "extra-function",     # fairer complexion -> [Whiten Skin, Image Enhancement]
    8: "unknown-main",       # darken my complexion -> [Darken Complexion]
    21: "wrong-function",    # open his eyes -> [Image Enhancement]
    27: "malformed-twice",   # sharpen it up -> free text, twice
    37: "unknown-sub",       # smoky tomato -> sub answers [Smoky Tomato]
}


def single_dataset() -> list[dict]:
    rows = []
    for i, (instruction, main, sub, _) in enumerate(SINGLE_CASES):
        rows.append(
            {
                "id": f"en-s-{i:03d}",
                "language": "EN",
                "arity": "single",
                "instruction": instruction,
                "expected": [sub or main],
            }
        )
    return rows


def single_entries(flat: bool) -> list[dict]:
    entries: list[dict] = []

    def add(match: str, response: str) -> None:
        entries.append({"match": match, "match_kind": "substring", "response": response})

    for i, (instruction, main, sub, goal) in enumerate(SINGLE_CASES):
        failure = SINGLE_FAILURES.get(i)
        leaf = sub or main

        if failure == "extra-function":
            names = [main, "Image Enhancement"]
            add(instruction, reply(names, analysis(i, names, goal)))
        elif failure == "unknown-main":
            add(instruction, reply(["Darken Complexion"], analysis(i, ["Darken Complexion"], goal)))
        elif failure == "wrong-function":
            add(instruction, reply(["Image Enhancement"], analysis(i, ["Image Enhancement"], goal)))
        elif failure == "malformed-twice":
            add(instruction, "I'd suggest improving the sharpness and contrast for you!")
            add(RETRY_MATCH, "Happy to help! Enhancement would definitely be my pick here.")
        elif failure == "unknown-sub":
            if flat:
                add(instruction, reply(["Smoky Tomato"], analysis(i, ["Smoky Tomato"], goal)))
            else:
                add(instruction, reply([main], analysis(i, [main], goal)))
                add(instruction, reply(["Smoky Tomato"], f"Smoky Tomato matches {goal} best."))
        elif flat:
            add(instruction, reply([leaf], analysis(i, [leaf], goal)))
        else:
            add(instruction, reply([main], analysis(i, [main], goal)))
            if sub is not None:
                add(instruction, reply([sub], f"Within {main}, {sub} matches {goal} best."))
    return entries


# --- dual-task cases ----------------------------------------------------------
#
# (instruction, [(main, sub-or-None), (main, sub-or-None)], goal)

DUAL_CASES = [
    ("remove the dog and make the photo black and white",
     [("Object Removal", None), ("Photo Filters", "Grayscale")], "the dog gone and a monochrome look"),
    ("open my eyes and brighten my skin",
     [("Open Eyes", None), ("Whiten Skin", None)], "open eyes and brighter skin"),
    ("erase the lamp post then give it a vintage feel",
     [("Object Removal", None), ("Photo Filters", "Vintage")], "the lamp post gone and a vintage feel"),
    ("classic red lipstick and slightly fairer skin please",
     [("Lipstick Coloring", "Pure Red"), ("Whiten Skin", None)], "red lips and fairer skin"),
    ("enhance the quality and warm up the colors",
     [("Image Enhancement", None), ("Photo Filters", "Warm")], "better quality and warmer colors"),
    ("keep only the cake and improve the picture quality",
     [("Object Retention", None), ("Image Enhancement", None)], "only the cake kept, at better quality"),
    ("make my eyes bigger and my face slimmer",
     [("Face Shaping", "Enlarge Eyes"), ("Face Shaping", "Slim Face")], "bigger eyes and a slimmer face"),
    ("remove the bicycle and darken my skin a bit",
     [("Object Removal", None), ("Darken Skin", None)], "the bicycle removed and a tanned tone"),
    ("coral lips and a warm golden tone for the photo",
     [("Lipstick Coloring", "Coral"), ("Photo Filters", "Warm")], "coral lips and a golden photo"),
    ("open her eyes and enhance the photo",
     [("Open Eyes", None), ("Image Enhancement", None)], "her eyes opened and the photo enhanced"),
    ("get rid of the traffic cone and cool the tones down",
     [("Object Removal", None), ("Photo Filters", "Cool")], "the cone removed and cooler tones"),
    ("slim my face and give me a soft pink lip",
     [("Face Shaping", "Slim Face"), ("Lipstick Coloring", "Rose Pink")], "a slimmer face and pink lips"),
    ("brighten my skin and make the shot monochrome",
     [("Whiten Skin", None), ("Photo Filters", "Grayscale")], "brighter skin in black and white"),
    ("remove the puddle and sharpen the whole photo",
     [("Object Removal", None), ("Image Enhancement", None)], "the puddle gone and a sharper photo"),
    ("tan my skin and add that faded retro look",
     [("Darken Skin", None), ("Photo Filters", "Vintage")], "tanned skin and a retro look"),
    ("bigger eyes and an orange lipstick please",
     [("Face Shaping", "Enlarge Eyes"), ("Lipstick Coloring", "Pure Orange")], "bigger eyes and orange lips"),
    ("keep just the statue and turn everything sepia",
     [("Object Retention", None), ("Photo Filters", "Sepia")], "only the statue, in sepia"),
    ("erase the sign on the wall and lighten my skin",
     [("Object Removal", None), ("Whiten Skin", None)], "the sign removed and lighter skin"),
    ("open my eyes and give me cherry red lips",
     [("Open Eyes", None), ("Lipstick Coloring", "Cherry")], "open eyes and cherry lips"),
    ("enhance this and then make it black and white",
     [("Image Enhancement", None), ("Photo Filters", "Grayscale")], "a crisper monochrome photo"),
    ("widen my eye spacing and brighten the skin",
     [("Face Shaping", "Widen Eye Distance"), ("Whiten Skin", None)], "wider-set eyes and brighter skin"),
    ("remove the clutter on the desk and boost the quality",
     [("Object Removal", None), ("Image Enhancement", None)], "a clean desk and better quality"),
    ("deep plum lipstick with a cool filter",
     [("Lipstick Coloring", "Deep Plum"), ("Photo Filters", "Cool")], "plum lips and a cool-toned photo"),
    ("make my skin darker and open my eyes",
     [("Darken Skin", None), ("Open Eyes", None)], "darker skin and open eyes"),
    ("take the ladder out of the frame and warm the light",
     [("Object Removal", None), ("Photo Filters", "Warm")], "the ladder gone and warmer light"),
    ("keep only my guitar and give the shot a vintage wash",
     [("Object Retention", None), ("Photo Filters", "Vintage")], "only the guitar, with a vintage wash"),
    ("slim the face and whiten the skin a touch",
     [("Face Shaping", "Slim Face"), ("Whiten Skin", None)], "a slimmer face and lighter skin"),
    ("mauve lips and enhance the resolution",
     [("Lipstick Coloring", "Mauve"), ("Image Enhancement", None)], "mauve lips at better quality"),
    ("delete the drone shadow and cool the image",
     [("Object Removal", None), ("Photo Filters", "Cool")], "the shadow removed and a cooler image"),
    ("bigger eyes and better overall quality",
     [("Face Shaping", "Enlarge Eyes"), ("Image Enhancement", None)], "bigger eyes and better quality"),
    ("nude lipstick and a light tan",
     [("Lipstick Coloring", "Nude Beige"), ("Darken Skin", None)], "nude lips and a light tan"),
    ("remove the second chair and keep the tones warm",
     [("Object Removal", None), ("Photo Filters", "Warm")], "the chair removed and warm tones"),
    ("open both eyes and slim my jawline",
     [("Open Eyes", None), ("Face Shaping", "Slim Face")], "open eyes and a slimmer jawline"),
    ("grayscale it and sharpen the details",
     [("Photo Filters", "Grayscale"), ("Image Enhancement", None)], "sharp monochrome details"),
    ("burnt tomato lips with a faded vintage photo",
     [("Lipstick Coloring", "Burnt Tomato"), ("Photo Filters", "Vintage")], "tomato-red lips on a vintage photo"),
    ("wipe out the background except the fountain and enhance it",
     [("Object Retention", None), ("Image Enhancement", None)], "only the fountain, enhanced"),
    ("whiten my skin and widen my eye distance",
     [("Whiten Skin", None), ("Face Shaping", "Widen Eye Distance")], "lighter skin and wider-set eyes"),
    ("erase the cables overhead and open my eyes",
     [("Object Removal", None), ("Open Eyes", None)], "no cables and open eyes"),
    ("a cherry lip and a sepia finish",
     [("Lipstick Coloring", "Cherry"), ("Photo Filters", "Sepia")], "cherry lips and a sepia finish"),
    ("remove the watermark sticker on the fridge and brighten my face",
     [("Object Removal", None), ("Whiten Skin", None)], "the sticker removed and a brighter face"),
    ("enhance the photo and enlarge my eyes",
     [("Image Enhancement", None), ("Face Shaping", "Enlarge Eyes")], "better quality and bigger eyes"),
    ("pink lips and a cool blue mood",
     [("Lipstick Coloring", "Rose Pink"), ("Photo Filters", "Cool")], "pink lips and a blue mood"),
    ("tan me and remove the beach umbrella",
     [("Darken Skin", None), ("Object Removal", None)], "a tan and no umbrella"),
    ("keep only the bride and give the photo an antique tone",
     [("Object Retention", None), ("Photo Filters", "Sepia")], "only the bride, antique-toned"),
    ("open my eyes and make everything monochrome",
     [("Open Eyes", None), ("Photo Filters", "Grayscale")], "open eyes in monochrome"),
    ("slim face plus a classic red lip",
     [("Face Shaping", "Slim Face"), ("Lipstick Coloring", "Pure Red")], "a slim face and red lips"),
    ("clean up the photo quality and erase the pigeon",
     [("Image Enhancement", None), ("Object Removal", None)], "better quality without the pigeon"),
    ("warm the image and brighten my skin",
     [("Photo Filters", "Warm"), ("Whiten Skin", None)], "a warm image and brighter skin"),
    ("orange lips and bigger-looking eyes",
     [("Lipstick Coloring", "Pure Orange"), ("Face Shaping", "Enlarge Eyes")], "orange lips and bigger eyes"),
    ("remove the extra person and keep my tan",
     [("Object Removal", None), ("Darken Skin", None)], "the person removed and a tanned look"),
]

DUAL_FAILURES = {
    6: "missing-half",      # answers only [Face Shaping] -> one sub resolved
    13: "unknown-main",     # -> [Object Removal, Photo Sharpening]
    24: "malformed-twice",
    34: "unknown-sub",      # lipstick sub answers [Tomato Smoke]
    46: "extra-function",   # three functions
}


def dual_dataset() -> list[dict]:
    rows = []
    for i, (instruction, parts, _) in enumerate(DUAL_CASES):
        expected = [sub or main for main, sub in parts]
        rows.append(
            {
                "id": f"en-d-{i:03d}",
                "language": "EN",
                "arity": "dual",
                "instruction": instruction,
                "expected": expected,
            }
        )
    return rows


def dual_entries(flat: bool) -> list[dict]:
    entries: list[dict] = []

    def add(match: str, response: str) -> None:
        entries.append({"match": match, "match_kind": "substring", "response": response})

    for i, (instruction, parts, goal) in enumerate(DUAL_CASES):
        failure = DUAL_FAILURES.get(i)
        mains = [main for main, _ in parts]
        leaves = [sub or main for main, sub in parts]

        if failure == "missing-half":
            half = parts[:1]
            names = [half[0][0]]
            if flat:
                add(instruction, reply([half[0][1] or half[0][0]], analysis(i, names, goal)))
            else:
                add(instruction, reply(names, analysis(i, names, goal)))
                if half[0][1] is not None:
                    add(instruction, reply([half[0][1]], f"{half[0][1]} fits {goal}."))
            continue
        if failure == "unknown-main":
            names = ["Object Removal", "Photo Sharpening"]
            add(instruction, reply(names, analysis(i, names, goal)))
            continue
        if failure == "malformed-twice":
            add(instruction, "Of course! Removing the ladder and warming the light sounds great.")
            add(RETRY_MATCH, "Sure thing, those two edits are exactly what I would apply!")
            continue
        if failure == "unknown-sub":
            if flat:
                add(instruction, reply(["Tomato Smoke", "Vintage"], analysis(i, ["Tomato Smoke"], goal)))
            else:
                add(instruction, reply(mains, analysis(i, mains, goal)))
                add(instruction, reply(["Tomato Smoke"], "Tomato Smoke is the closest shade."))
                add(instruction, reply(["Vintage"], "Vintage gives the faded wash."))
            continue
        if failure == "extra-function":
            names = leaves + ["Open Eyes"] if flat else mains + ["Open Eyes"]
            add(instruction, reply(names, analysis(i, names, goal)))
            if not flat:
                for main, sub in parts:
                    if sub is not None:
                        add(instruction, reply([sub], f"{sub} is the match for {goal}."))
            continue

        if flat:
            add(instruction, reply(leaves, analysis(i, leaves, goal)))
        else:
            add(instruction, reply(mains, analysis(i, mains, goal)))
            for main, sub in parts:
                if sub is not None:
                    add(instruction, reply([sub], f"Within {main}, {sub} fits {goal}."))
    return entries


# --- ablation set ---------------------------------------------------------------

ABLATION_CASES = SINGLE_CASES[0:6] + SINGLE_CASES[9:12] + SINGLE_CASES[18:21] + [
    SINGLE_CASES[23], SINGLE_CASES[24],
    SINGLE_CASES[31], SINGLE_CASES[32], SINGLE_CASES[38],
    SINGLE_CASES[40], SINGLE_CASES[46], SINGLE_CASES[48],
]

# Leaf-only cases marked for the discipline wrapper (instruction, threshold).
DISCIPLINE_RULES = [
    ("make my skin brighter please", 1),
    ("remove the trash can behind me", 1),
    ("can u open my eyes", 2),
    ("enhance the photo quality", 3),
    ("give me a tanned look", 3),
]


def ablation_dataset() -> list[dict]:
    rows = []
    for i, (instruction, main, sub, _) in enumerate(ABLATION_CASES):
        rows.append(
            {
                "id": f"en-a-{i:03d}",
                "language": "EN",
                "arity": "single",
                "instruction": instruction,
                "expected": [sub or main],
            }
        )
    return rows


def ablation_entries(flat: bool) -> list[dict]:
    entries: list[dict] = []
    for i, (instruction, main, sub, goal) in enumerate(ABLATION_CASES):
        leaf = sub or main
        if flat:
            entries.append({"match": instruction, "match_kind": "substring",
                            "response": reply([leaf], analysis(i, [leaf], goal))})
        else:
            entries.append({"match": instruction, "match_kind": "substring",
                            "response": reply([main], analysis(i, [main], goal))})
            if sub is not None:
                entries.append({"match": instruction, "match_kind": "substring",
                                "response": reply([sub], f"Within {main}, {sub} fits {goal}.")})
    return entries


def write_jsonl(path: Path, rows: list[dict]) -> None:
    path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows),
                    encoding="utf-8")


def write_fixture(path: Path, entries: list[dict]) -> None:
    path.write_text(
        json.dumps({"strict": True, "entries": entries}, indent=2, ensure_ascii=False),
        encoding="utf-8",
    )


def removal_demo(out: Path) -> None:
    """Three synthetic removal scenes: smooth gradient backgrounds with a
    colored box, exact stub masks, ground truth = background only."""
    import numpy as np

    from chatedit.imaging import BinaryMask, RasterImage

    out.mkdir(parents=True, exist_ok=True)
    lines = []
    for i in range(3):
        yy, xx = np.mgrid[0:64, 0:64]
        base = (70 + yy * 1.1 + xx * 0.5 + i * 9).astype(np.uint8)
        truth = RasterImage(np.stack([base, base + 12, base + 24], axis=2).astype(np.uint8))
        bits = np.zeros((64, 64), dtype=bool)
        y0, x0 = 16 + 4 * i, 20 + 6 * i
        bits[y0 : y0 + 11, x0 : x0 + 11] = True
        scene_arr = truth.data.copy()
        scene_arr[bits] = (215, 45, 45)

        RasterImage(scene_arr).save(out / f"scene{i}.png")
        truth.save(out / f"truth{i}.png")
        BinaryMask(bits).save(out / f"mask{i}.png")
        lines.append(json.dumps({
            "id": f"demo-{i}",
            "source": f"scene{i}.png",
            "target": f"truth{i}.png",
            "prompt": f"remove the red box in photo {i}",
            "category": "box",
            "description": f"the red box in photo {i}",
            "description_mask": f"mask{i}.png",
            "category_masks": [f"mask{i}.png"],
        }))
    (out / "manifest.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)

    write_jsonl(OUT / "en-single.jsonl", single_dataset())
    write_fixture(OUT / "en-single-hier.json", single_entries(flat=False))
    write_fixture(OUT / "en-single-flat.json", single_entries(flat=True))

    write_jsonl(OUT / "en-dual.jsonl", dual_dataset())
    write_fixture(OUT / "en-dual-hier.json", dual_entries(flat=False))
    write_fixture(OUT / "en-dual-flat.json", dual_entries(flat=True))

    write_jsonl(OUT / "ablation.jsonl", ablation_dataset())
    write_fixture(OUT / "ablation-hier.json", ablation_entries(flat=False))
    write_fixture(OUT / "ablation-flat.json", ablation_entries(flat=True))
    (OUT / "ablation-discipline.json").write_text(
        json.dumps(
            {"rules": [{"match": m, "min_examples": k} for m, k in DISCIPLINE_RULES]},
            indent=2,
        ),
        encoding="utf-8",
    )
    removal_demo(OUT / "removal")
    print(f"wrote fixtures under {OUT}")


if __name__ == "__main__":
    main()
