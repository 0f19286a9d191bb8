"""Genetic search over a small space of threshold-based segmenters.

The genome is deliberately tiny (channel, threshold, invert, morphology) but
rich enough that the labeled-array distances act as real fitness functions:
the GA minimizes LAD or MADLAD against a ground truth, and MADLAD's 1.5
degenerate sentinel automatically deprioritizes collapsed segmentations.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    LabeledArray,
    ParseError,
    _HeaderScanner,
    _parse_pgm,
    _WHITESPACE,
    require_same_shape,
)
from .metrics import compute_metric
from .perturb import MorphSpec, morph

__all__ = [
    "ConfigError",
    "GenerationStat",
    "Genome",
    "Raster",
    "SearchConfig",
    "SearchReport",
    "apply_genome",
    "evolve",
    "fitness",
    "load_raster",
    "random_genome",
]

CHANNELS = ("gray", "r", "g", "b")
GENOME_MORPH_OPS = ("none", "open", "close")
FOOTPRINT_SIDES = (1, 3, 5, 7)
FITNESS_METRICS = ("lad", "madlad")


class ConfigError(ValueError):
    """Search configuration outside its allowed bounds."""


@dataclass(frozen=True)
class Raster:
    """Grayscale (M, N) or RGB (M, N, 3) intensity image."""

    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.ndim not in (2, 3):
            raise ValueError(f"raster must be 2-D or 3-D, got ndim={self.pixels.ndim}")
        if self.pixels.ndim == 3 and self.pixels.shape[2] != 3:
            raise ValueError(f"RGB raster must have 3 channels, got {self.pixels.shape[2]}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape[:2]

    @property
    def is_rgb(self) -> bool:
        return self.pixels.ndim == 3

    def channel(self, name: str) -> np.ndarray:
        if name == "gray":
            if self.is_rgb:
                return self.pixels.mean(axis=2)
            return self.pixels
        if not self.is_rgb:
            raise ValueError(f"channel {name!r} unavailable on a grayscale raster")
        return self.pixels[:, :, "rgb".index(name)]


def load_raster(path) -> Raster:
    """Read a PGM (grayscale) or PPM (P6, RGB) raster."""
    path = Path(path)
    data = path.read_bytes()
    if data[:2] == b"P5":
        return Raster(np.asarray(_parse_pgm(data).data))
    if data[:2] == b"P6":
        return Raster(_parse_ppm_body(data))
    raise ParseError(f"not a PGM/PPM raster (magic {data[:2]!r})", 0)


def _parse_ppm_body(data: bytes) -> np.ndarray:
    scan = _HeaderScanner(data, 2)
    cols = scan.read_int("width")
    rows = scan.read_int("height")
    maxval = scan.read_int("maxval")
    if not 1 <= maxval <= 65535:
        raise ParseError(f"PPM maxval {maxval} outside [1, 65535]", 2)
    if scan.pos >= len(data) or data[scan.pos : scan.pos + 1] not in _WHITESPACE:
        raise ParseError("missing whitespace after PPM maxval", scan.pos)
    start = scan.pos + 1
    width = 2 if maxval > 255 else 1
    expected = rows * cols * 3 * width
    payload = data[start : start + expected]
    if len(payload) < expected:
        raise ParseError(
            f"truncated PPM payload: expected {expected} bytes, got {len(payload)}",
            start + len(payload),
        )
    dtype = ">u2" if width == 2 else np.uint8
    return np.frombuffer(payload, dtype=dtype).astype(np.int64).reshape(rows, cols, 3)


@dataclass(frozen=True)
class Genome:
    channel: str = "gray"
    threshold: int = 128
    invert: bool = False
    morph_op: str = "none"
    footprint_side: int = 3

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ConfigError(f"unknown channel {self.channel!r}")
        if not 0 <= self.threshold <= 255:
            raise ConfigError(f"threshold {self.threshold} outside [0, 255]")
        if self.morph_op not in GENOME_MORPH_OPS:
            raise ConfigError(f"unknown morph op {self.morph_op!r}")
        if self.footprint_side not in FOOTPRINT_SIDES:
            raise ConfigError(f"footprint side must be one of {FOOTPRINT_SIDES}")

    def to_genes(self) -> tuple[int, int, int, int, int]:
        return (
            CHANNELS.index(self.channel),
            self.threshold,
            int(self.invert),
            GENOME_MORPH_OPS.index(self.morph_op),
            FOOTPRINT_SIDES.index(self.footprint_side),
        )

    @classmethod
    def from_genes(cls, genes) -> "Genome":
        return cls(
            channel=CHANNELS[genes[0]],
            threshold=int(genes[1]),
            invert=bool(genes[2]),
            morph_op=GENOME_MORPH_OPS[genes[3]],
            footprint_side=FOOTPRINT_SIDES[genes[4]],
        )


# per-gene domain sizes, in to_genes() order; grayscale rasters pin the
# channel gene to "gray" (index 0) so every genome stays evaluable
def _gene_sizes(image: "Raster") -> tuple[int, int, int, int, int]:
    return (len(CHANNELS) if image.is_rgb else 1, 256, 2, len(GENOME_MORPH_OPS), len(FOOTPRINT_SIDES))


def random_genome(rng: np.random.Generator, image: "Raster | None" = None) -> Genome:
    sizes = _gene_sizes(image) if image is not None else (len(CHANNELS), 256, 2, len(GENOME_MORPH_OPS), len(FOOTPRINT_SIDES))
    return Genome.from_genes([int(rng.integers(size)) for size in sizes])


def apply_genome(genome: Genome, image: Raster) -> LabeledArray:
    """Run the genome's segmenter: channel select, threshold, invert, morphology."""
    values = image.channel(genome.channel)
    mask = (values > genome.threshold).astype(np.int64)
    if genome.invert:
        mask = 1 - mask
    arr = LabeledArray(mask)
    if genome.morph_op != "none":
        arr = morph(arr, MorphSpec(genome.morph_op, genome.footprint_side, foreground_label=1))
    return arr


def fitness(genome: Genome, image: Raster, gt: LabeledArray, metric: str = "lad") -> float:
    """Distance of the genome's segmentation from the ground truth (lower is better)."""
    if metric not in FITNESS_METRICS:
        raise ConfigError(f"fitness metric must be one of {FITNESS_METRICS}, got {metric!r}")
    candidate = apply_genome(genome, image)
    require_same_shape(gt, candidate)
    return compute_metric(metric, gt, candidate).value


@dataclass(frozen=True)
class SearchConfig:
    population: int = 20
    generations: int = 50
    metric: str = "lad"
    seed: int = 0
    crossover_rate: float = 0.7
    mutation_rate: float = 0.1
    elitism: int = 1
    tournament_size: int = 3

    def __post_init__(self):
        if self.population < 2:
            raise ConfigError(f"population must be >= 2, got {self.population}")
        if self.generations < 0:
            raise ConfigError(f"generations must be >= 0, got {self.generations}")
        if not 0 <= self.elitism < self.population:
            raise ConfigError(f"elitism must be in [0, population), got {self.elitism}")
        if self.metric not in FITNESS_METRICS:
            raise ConfigError(f"metric must be one of {FITNESS_METRICS}, got {self.metric!r}")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ConfigError(f"crossover rate {self.crossover_rate} outside [0, 1]")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ConfigError(f"mutation rate {self.mutation_rate} outside [0, 1]")
        if self.tournament_size < 1:
            raise ConfigError(f"tournament size must be >= 1, got {self.tournament_size}")


@dataclass(frozen=True)
class GenerationStat:
    generation: int
    best: float
    mean: float


@dataclass(frozen=True)
class SearchReport:
    best_genome: Genome
    best_fitness: float
    history: list[GenerationStat]
    ranked_population: list[tuple[Genome, float]]

    def history_csv(self) -> str:
        lines = ["generation,best,mean"]
        lines += [f"{s.generation},{s.best!r},{s.mean!r}" for s in self.history]
        return "\n".join(lines) + "\n"


def evolve(
    config: SearchConfig,
    image: Raster,
    gt: LabeledArray,
    initial: list[Genome] | None = None,
) -> SearchReport:
    """Seeded, fully deterministic GA minimizing the configured metric.

    Tournament selection, single-point crossover over the 5-gene vector,
    per-gene uniform mutation, and elitism (so the best fitness never
    regresses between generations). `initial` seeds the first population.
    """
    rng = np.random.default_rng(config.seed)
    gene_sizes = _gene_sizes(image)
    population = list(initial or [])[: config.population]
    for genome in population:
        if not image.is_rgb and genome.channel != "gray":
            raise ConfigError(f"initial genome uses channel {genome.channel!r} on a grayscale image")
    while len(population) < config.population:
        population.append(random_genome(rng, image))

    cache: dict[Genome, float] = {}

    def score(genome: Genome) -> float:
        if genome not in cache:
            cache[genome] = fitness(genome, image, gt, config.metric)
        return cache[genome]

    history: list[GenerationStat] = []
    for generation in range(config.generations + 1):
        scores = [score(g) for g in population]
        order = sorted(range(len(population)), key=lambda k: scores[k])
        history.append(
            GenerationStat(generation, best=scores[order[0]], mean=float(np.mean(scores)))
        )
        if generation == config.generations:
            ranked = [(population[k], scores[k]) for k in order]
            return SearchReport(
                best_genome=ranked[0][0],
                best_fitness=ranked[0][1],
                history=history,
                ranked_population=ranked,
            )

        def pick_parent() -> Genome:
            contenders = rng.integers(len(population), size=config.tournament_size)
            winner = min(contenders, key=lambda k: scores[k])
            return population[int(winner)]

        next_population = [population[k] for k in order[: config.elitism]]
        while len(next_population) < config.population:
            mother = list(pick_parent().to_genes())
            if rng.random() < config.crossover_rate:
                father = pick_parent().to_genes()
                point = int(rng.integers(1, len(mother)))
                mother[point:] = father[point:]
            for gene, size in enumerate(gene_sizes):
                if rng.random() < config.mutation_rate:
                    mother[gene] = int(rng.integers(size))
            next_population.append(Genome.from_genes(mother))
        population = next_population
    raise AssertionError("unreachable")
