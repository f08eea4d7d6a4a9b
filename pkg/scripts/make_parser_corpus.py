#!/usr/bin/env python3
"""Generate tests/data/parser_corpus.jsonl.

Every row carries the expected classification derived from how the string
was constructed (template + span + video length), so the labels are
independent of the parser implementation. Run once and commit the output;
the corpus is a versioned fixture.
"""

from __future__ import annotations

import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "parser_corpus.jsonl"

N = 60  # default video length for generated rows


def row(text, n_frames, fps, validity, start, end):
    return {
        "text": text,
        "n_frames": n_frames,
        "fps": fps,
        "validity": validity,
        "start": start,
        "end": end,
    }


def main() -> None:
    rows = []

    # Known hallucination shapes and template answers, with their stated outcomes.
    rows += [
        row("From 12 to 17", 60, 1.0, "valid", 12, 17),
        row("from frame 000 to frame 200", 19, 1.0, "clamped", 0, 18),
        row("from 2 to .", 19, 1.0, "malformed", None, None),
        row("The given query happens in344-", 60, 1.0, "malformed", None, None),
        row("from frame 000 to 580", 10, 1.0, "clamped", 0, 9),
        row("from 200 to 599", 100, 1.0, "out_of_range", None, None),
    ]

    # In-range spans across phrasing variants -> Valid with the literal span.
    valid_templates = [
        "From {x} to {y}",
        "from {x} to {y}",
        "FROM {x} TO {y}",
        "From {x} to {y}.",
        "From frame {x} to frame {y}",
        "from frames {x} to {y}",
        "The event happens from {x} to {y} in the video.",
        "Sure - the moment runs from {x} to {y}, roughly.",
        "Answer: from {x} to {y}",
        "{x} to {y}",
        "{x}-{y}",
        "{x} - {y}",
        "{x}–{y}",
        "From {x:03d} to {y:03d}",
        "from frame #{x} to frame #{y}",
    ]
    span_pairs = [
        (0, 0), (0, 5), (3, 9), (12, 17), (2, 2),
        (10, 40), (7, 23), (0, 59), (44, 58), (1, 58),
    ]
    for template in valid_templates:
        for x, y in span_pairs:
            rows.append(row(template.format(x=x, y=y), N, 1.0, "valid", x, y))

    # Inverted endpoints swap and mark Clamped.
    inverted_templates = ["From {a} to {b}", "from frame {a} to frame {b}", "{a}-{b}"]
    inverted_pairs = [(9, 3), (17, 12), (58, 1), (40, 10), (5, 0)]
    for template in inverted_templates:
        for a, b in inverted_pairs:
            rows.append(row(template.format(a=a, b=b), N, 1.0, "clamped", b, a))

    # End past the last frame clamps; start must stay inside.
    clamp_cases = [
        ("From 10 to 60", 10, 59), ("From 0 to 100", 0, 59),
        ("from frame 05 to frame 99", 5, 59), ("From 59 to 60", 59, 59),
        ("from 0 to 60.9", 0, 59), ("33 to 1000", 33, 59),
        ("from 000 to 060", 0, 59), ("From 20 to 770", 20, 59),
        ("45-200", 45, 59), ("from 12 to 9999999", 12, 59),
    ]
    for text, s, e in clamp_cases:
        rows.append(row(text, N, 1.0, "clamped", s, e))
    # Inverted and clamped at once still reads Clamped.
    rows.append(row("From 200 to 10", N, 1.0, "clamped", 10, 59))

    # Both endpoints beyond the video -> OutOfRange, no scorable span.
    oor_cases = [
        "From 60 to 60", "From 70 to 80", "from frame 100 to frame 200",
        "344-512", "From 600 to 900", "from 99 to 60",
        "From 500 to 100",  # swaps to (100, 500), still fully outside
        "60 to 75", "from 061 to 088", "From 1000 to 2000",
    ]
    for text in oor_cases:
        rows.append(row(text, N, 1.0, "out_of_range", None, None))

    # No extractable pair at all -> Malformed.
    malformed_cases = [
        "", "no relevant moment", "From to", "from x to y",
        "I cannot determine the exact frames.", "The answer is frame",
        "from 5", "From 3 to", "from . to 2", "344-", "12-",
        "The video shows a person cooking.", "somewhere in the middle",
        "N/A", "??", "from  to 7", "It starts at 5 and ends at 9.",
        "frame", "to 9", "From  to ", "The person appears throughout.",
        "error: no output", "…", "frames are numbered in red",
        "I see red numbers on each frame.",
    ]
    for text in malformed_cases:
        rows.append(row(text, N, 1.0, "malformed", None, None))

    # First structured pair wins, even when it belongs to a restated query.
    rows += [
        row("The query 'walking from 1 to 2 dogs' occurs from 30 to 45.", N, 1.0, "valid", 1, 2),
        row("From 4.5 to 10.25", N, 1.0, "valid", 4, 10),  # fractions floor
        row("from 3.0 to 9.0, I think", N, 1.0, "valid", 3, 9),
        row("From 0 to 0", 1, 1.0, "valid", 0, 0),
        row("From 0 to 3", 1, 1.0, "clamped", 0, 0),
        row("from 2 to 5", 1, 1.0, "out_of_range", None, None),
        row("From 10 to 20", 200, 0.5, "valid", 10, 20),
        row("from frame 007 to frame 012", 30, 2.0, "valid", 7, 12),
    ]

    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w", encoding="utf-8") as fh:
        for r in rows:
            fh.write(json.dumps(r, ensure_ascii=False) + "\n")
    print(f"wrote {len(rows)} rows -> {OUT}")


if __name__ == "__main__":
    main()
