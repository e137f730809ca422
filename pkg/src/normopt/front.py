"""Sets of solutions (genome plus scores) and their CSV form."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from normopt.errors import ContractError
from normopt.society import NormVector
from normopt.values import ObjectiveVector


def norm_gene_names(num_groups: int = 5) -> tuple[str, ...]:
    return (
        *(f"collect_{k}" for k in range(1, num_groups + 1)),
        *(f"redistribute_{k}" for k in range(1, num_groups + 1)),
        "catch",
        "fine",
    )


GENE_NAMES = norm_gene_names()


@dataclass
class Front:
    """Solutions of one run (or a merged set), objectives in maximization sense."""

    genes: np.ndarray
    objectives: np.ndarray
    objective_set: tuple[str, ...]
    gene_names: tuple[str, ...] = GENE_NAMES

    def __post_init__(self) -> None:
        self.genes = np.atleast_2d(np.asarray(self.genes, dtype=float)).reshape(-1, len(self.gene_names))
        self.objectives = np.asarray(self.objectives, dtype=float).reshape(-1, len(self.objective_set))
        self.objective_set = tuple(self.objective_set)
        self.gene_names = tuple(self.gene_names)
        if len(self.genes) != len(self.objectives):
            raise ContractError(f"{len(self.genes)} genomes but {len(self.objectives)} objective rows")

    def __len__(self) -> int:
        return len(self.genes)

    def norms(self, i: int) -> NormVector:
        return NormVector.from_array(self.genes[i], (len(self.gene_names) - 2) // 2)

    def objective_vector(self, i: int) -> ObjectiveVector:
        return ObjectiveVector(tuple(self.objectives[i]), self.objective_set)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([*self.gene_names, *self.objective_set])
        for g, f in zip(self.genes, self.objectives):
            writer.writerow([repr(float(x)) for x in (*g, *f)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, gene_count: int | None = None) -> "Front":
        """Parse CSV text; genome columns are the known gene names unless ``gene_count`` is given."""
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ContractError("front CSV is empty (no header)")
        header = rows[0]
        if gene_count is None:
            gene_count = sum(1 for name in header if name in GENE_NAMES)
        names, objectives = tuple(header[:gene_count]), tuple(header[gene_count:])
        if not objectives:
            raise ContractError("front CSV has no objective columns")
        try:
            data = np.array([[float(x) for x in row] for row in rows[1:] if row], dtype=float)
        except ValueError as exc:
            raise ContractError(f"front CSV has a non-numeric cell: {exc}") from None
        if data.size and data.shape[1] != len(header):
            raise ContractError(f"front CSV rows have {data.shape[1]} cells, header has {len(header)}")
        data = data.reshape(-1, len(header))
        return cls(data[:, :gene_count], data[:, gene_count:], objectives, names)

    @classmethod
    def read(cls, path: str | Path) -> "Front":
        return cls.from_csv(Path(path).read_text())

    @classmethod
    def merge(cls, fronts: Sequence["Front"]) -> "Front":
        if not fronts:
            raise ContractError("nothing to merge")
        first = fronts[0]
        if any(f.objective_set != first.objective_set for f in fronts):
            raise ContractError("cannot merge fronts over different objective sets")
        return cls(
            np.vstack([f.genes for f in fronts]),
            np.vstack([f.objectives for f in fronts]),
            first.objective_set,
            first.gene_names,
        )
