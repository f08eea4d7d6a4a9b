"""Search overlay designs by how recognizable the number stays and how
little it disturbs the image.

Each candidate design is scored on a shared probe set of image-caption
pairs: the probe's number is rendered onto its image, the annotated image
is embedded, and two argmax accuracies are computed against text
embeddings — the 100 number strings "0".."99" for number accuracy, the
full caption pool for caption accuracy. Candidates are ranked by the
harmonic mean of the two, which collapses to 0 when either side does.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .overlay import NAMED_COLORS, OverlayConfig, Position
from .providers import EmbeddingProvider, ProviderError

NUMBER_RANGE = 100  # overlaid values span "0".."99"

# Sweep axes: 4 font sizes x 4 colors x 5 positions = 80 candidates.
SWEEP_SIZES = (20, 40, 60, 80)
SWEEP_COLORS = ("red", "blue", "black", "green")
SWEEP_POSITIONS = tuple(Position)


@dataclass(frozen=True)
class ProbePair:
    image_id: str
    caption: str
    true_number: int

    def __post_init__(self) -> None:
        if not self.caption:
            raise ValueError("caption must be nonempty")
        if not 0 <= self.true_number < NUMBER_RANGE:
            raise ValueError(f"true_number must be in [0, {NUMBER_RANGE - 1}], got {self.true_number}")


@dataclass(frozen=True)
class ScoredCandidate:
    config: OverlayConfig
    number_accuracy: float
    caption_accuracy: float
    combined: float


class PartialResultsError(Exception):
    """Some candidates could not be scored; carries what did finish."""

    def __init__(self, scored: list[ScoredCandidate], unscored: list[tuple[int, OverlayConfig, str]]):
        self.scored = scored
        self.unscored = unscored
        names = ", ".join(f"#{i} ({_config_label(cfg)})" for i, cfg, _ in unscored)
        super().__init__(f"{len(unscored)} candidate(s) unscored: {names}")


def cosine_similarity(a, b) -> float:
    """Cosine of two vectors; symmetric and scale-invariant by construction."""
    va = np.asarray(a, dtype=np.float64).reshape(-1)
    vb = np.asarray(b, dtype=np.float64).reshape(-1)
    if va.size != vb.size:
        raise ValueError(f"dimension mismatch: {va.size} vs {vb.size}")
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity is undefined for zero vectors")
    return float(np.dot(va, vb) / (na * nb))


def _unit_rows(vectors: Sequence) -> np.ndarray:
    mat = np.asarray([np.asarray(v, dtype=np.float64).reshape(-1) for v in vectors])
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise ValueError("zero-norm embedding in input")
    return mat / norms


def argmax_accuracy(image_embs: Sequence, candidate_embs: Sequence, truths: Sequence[int]) -> float:
    """Fraction of images whose most-similar candidate is the true one.

    Ties break toward the lowest candidate index, making reruns stable.
    """
    if len(image_embs) == 0:
        raise ValueError("need at least one probe image")
    if len(image_embs) != len(truths):
        raise ValueError(f"{len(image_embs)} images but {len(truths)} truth labels")
    images = _unit_rows(image_embs)
    cands = _unit_rows(candidate_embs)
    if images.shape[1] != cands.shape[1]:
        raise ValueError(f"dimension mismatch: {images.shape[1]} vs {cands.shape[1]}")
    sims = images @ cands.T
    preds = np.argmax(sims, axis=1)  # first max wins
    truths_arr = np.asarray(truths, dtype=np.int64)
    return float(np.mean(preds == truths_arr))


def number_accuracy(image_embs: Sequence, number_text_embs: Sequence, truths: Sequence[int]) -> float:
    if len(number_text_embs) != NUMBER_RANGE:
        raise ValueError(f"expected {NUMBER_RANGE} number embeddings, got {len(number_text_embs)}")
    return argmax_accuracy(image_embs, number_text_embs, truths)


def caption_accuracy(
    image_embs: Sequence, caption_pool_embs: Sequence, truth_indices: Sequence[int]
) -> float:
    if len(caption_pool_embs) == 0:
        raise ValueError("caption pool must be nonempty")
    return argmax_accuracy(image_embs, caption_pool_embs, truth_indices)


def harmonic_mean(a: float, b: float) -> float:
    if a <= 0.0 or b <= 0.0:
        return 0.0
    return 2.0 * a * b / (a + b)


# Renders a probe's number onto its image and returns encoded bytes.
AnnotatedImageRenderer = Callable[[str, int, OverlayConfig], bytes]


def sweep_grid(
    sizes: Sequence[int] = SWEEP_SIZES,
    colors: Sequence[str] = SWEEP_COLORS,
    positions: Sequence[Position] = SWEEP_POSITIONS,
) -> list[OverlayConfig]:
    """The default size x color x position candidate grid."""
    grid = []
    for size in sizes:
        for color in colors:
            rgb = NAMED_COLORS[color] if isinstance(color, str) else tuple(color)
            for pos in positions:
                grid.append(OverlayConfig(font_size_px=size, color=rgb, position=pos))
    return grid


def grid_search(
    candidates: Sequence[OverlayConfig],
    probes: Sequence[ProbePair],
    provider: EmbeddingProvider,
    renderer: AnnotatedImageRenderer,
) -> list[ScoredCandidate]:
    """Score every candidate on the same probe set and rank them.

    Ranking is by combined score descending, ties by number accuracy and
    then candidate order. Raises PartialResultsError when the provider
    fails for some candidates; scores that did complete ride along on it.
    """
    if not candidates:
        raise ValueError("no candidate configurations")
    if not probes:
        raise ValueError("no probe pairs")

    try:
        number_embs = [provider.embed_text(str(i)) for i in range(NUMBER_RANGE)]
        caption_embs = [provider.embed_text(p.caption) for p in probes]
    except ProviderError as exc:
        raise PartialResultsError([], [(i, c, str(exc)) for i, c in enumerate(candidates)]) from exc

    truths_number = [p.true_number for p in probes]
    truths_caption = list(range(len(probes)))

    indexed: list[tuple[int, ScoredCandidate]] = []
    unscored: list[tuple[int, OverlayConfig, str]] = []
    for ci, config in enumerate(candidates):
        try:
            image_embs = [
                provider.embed_image(renderer(p.image_id, p.true_number, config)) for p in probes
            ]
        except ProviderError as exc:
            unscored.append((ci, config, str(exc)))
            continue
        na = number_accuracy(image_embs, number_embs, truths_number)
        ca = caption_accuracy(image_embs, caption_embs, truths_caption)
        indexed.append((ci, ScoredCandidate(config, na, ca, harmonic_mean(na, ca))))

    indexed.sort(key=lambda item: (-item[1].combined, -item[1].number_accuracy, item[0]))
    ranked = [sc for _, sc in indexed]
    if unscored:
        raise PartialResultsError(ranked, unscored)
    return ranked


def pareto_front(scored: Sequence[ScoredCandidate]) -> list[ScoredCandidate]:
    """Candidates not dominated on (number accuracy, caption accuracy)."""

    def dominated(c: ScoredCandidate) -> bool:
        return any(
            o.number_accuracy >= c.number_accuracy
            and o.caption_accuracy >= c.caption_accuracy
            and (o.number_accuracy > c.number_accuracy or o.caption_accuracy > c.caption_accuracy)
            for o in scored
        )

    return [c for c in scored if not dominated(c)]


def color_label(rgb: tuple[int, int, int]) -> str:
    for name, value in NAMED_COLORS.items():
        if tuple(rgb) == value:
            return name
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _config_label(config: OverlayConfig) -> str:
    return f"size={config.font_size_px} color={color_label(config.color)} pos={config.position.value}"


def write_score_table(scored: Sequence[ScoredCandidate], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["size", "color", "position", "number_acc", "caption_acc", "combined"])
        for sc in scored:
            writer.writerow(
                [
                    sc.config.font_size_px,
                    color_label(sc.config.color),
                    sc.config.position.value,
                    repr(sc.number_accuracy),
                    repr(sc.caption_accuracy),
                    repr(sc.combined),
                ]
            )


def load_candidates_file(path: Path | str) -> list[OverlayConfig]:
    """Candidate configs from JSONL rows {size, color, position[, margin]}."""
    from .io_utils import read_jsonl, require_fields

    out = []
    for lineno, rec in read_jsonl(path):
        require_fields(rec, ("size", "color", "position"), path, lineno)
        color = rec["color"]
        rgb = NAMED_COLORS[color] if isinstance(color, str) else tuple(int(c) for c in color)
        out.append(
            OverlayConfig(
                font_size_px=int(rec["size"]),
                color=rgb,
                position=Position(rec["position"]),
                margin_px=int(rec.get("margin", 10)),
            )
        )
    return out


def load_probes_file(path: Path | str) -> list[ProbePair]:
    from .io_utils import read_jsonl, require_fields

    out = []
    for lineno, rec in read_jsonl(path):
        require_fields(rec, ("image_id", "caption", "true_number"), path, lineno)
        out.append(
            ProbePair(
                image_id=str(rec["image_id"]),
                caption=str(rec["caption"]),
                true_number=int(rec["true_number"]),
            )
        )
    return out
