"""Structural graph of an array, built node by node.

This enumerates every register, multiplier, adder node and multiplexer
of a configured array as explicit records, with no shared arithmetic
with the closed forms in stasim.arch. Tests compare the tallies of this
graph against the closed-form CostReport.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from stasim.arch import ArrayConfig, check_config


@dataclass(frozen=True)
class Node:
    kind: str  # operand_reg | index_reg | accumulator_reg | multiplier | adder_node | mux
    width: int  # stored bits for registers, operand bits for multipliers, legs for muxes


def build_structural_graph(config: ArrayConfig) -> list[Node]:
    """Instantiate one node record per physical structure in the array."""
    check_config(config)
    nodes: list[Node] = []
    index_width = (config.b - 1).bit_length()
    for _pe_row in range(config.m):
        for _pe_col in range(config.n):
            # operand staging: one register per activation entering the PE
            for _row in range(config.a):
                for _pair in range(config.b):
                    nodes.append(Node("operand_reg", 8))
            # weight staging: dense keeps the full b x c slab, the
            # density-bound PE keeps value+index pairs per lane
            if config.variant == "STA_DBB":
                for _lane in range(config.dbb_nnz):
                    for _col in range(config.c):
                        nodes.append(Node("operand_reg", 8))
                        nodes.append(Node("index_reg", index_width))
            else:
                for _pair in range(config.b):
                    for _col in range(config.c):
                        nodes.append(Node("operand_reg", 8))
            # one dot-product unit per (row, col) output of the PE
            for _row in range(config.a):
                for _col in range(config.c):
                    nodes.append(Node("accumulator_reg", 32))
                    lanes = config.dbb_nnz if config.variant == "STA_DBB" else config.b
                    for _lane in range(lanes):
                        nodes.append(Node("multiplier", 8))
                        if config.variant == "STA_DBB":
                            nodes.append(Node("mux", config.b))
                    for _tree in range(lanes - 1):
                        nodes.append(Node("adder_node", 0))
                    nodes.append(Node("adder_node", 0))  # accumulate stage
    return nodes


def tally(nodes: list[Node]) -> dict[str, dict[str, int]]:
    """Count nodes and total stored bits per kind."""
    result: dict[str, dict[str, int]] = defaultdict(lambda: {"count": 0, "bits": 0})
    for node in nodes:
        result[node.kind]["count"] += 1
        result[node.kind]["bits"] += node.width
    return dict(result)
