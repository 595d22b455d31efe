"""Independent reference computations. They read flows directly and share no code with bore's algorithms."""
from __future__ import annotations

from bore.model import DecisionGateway, EndNode, ProcessModel


def adjacency(model: ProcessModel) -> dict[str, list[str]]:
    adj: dict[str, list[str]] = {n.id: [] for n in model.nodes}
    for f in model.flows:
        adj.setdefault(f.source, []).append(f.target)
    return adj


def bfs(model: ProcessModel, seed: str) -> set[str]:
    adj = adjacency(model)
    seen, frontier = {seed}, [seed]
    while frontier:
        nxt = []
        for node in frontier:
            for t in adj.get(node, []):
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
        frontier = nxt
    return seen


def brute_force_paths(model: ProcessModel, max_rounds: int) -> list[tuple[str, ...]]:
    """Every start-to-end node sequence, with each gateway's looping branches taken at most max_rounds times."""
    kinds = {n.id: n for n in model.nodes}
    out_flows: dict[str, list] = {}
    for f in model.flows:
        out_flows.setdefault(f.source, []).append(f)
    looping = {
        (f.source, f.branch)
        for f in model.flows
        if isinstance(kinds[f.source], DecisionGateway) and f.source in bfs(model, f.target)
    }
    (start,) = [n.id for n in model.nodes if type(n).__name__ == "StartNode"]
    found: list[tuple[str, ...]] = []

    def walk(node: str, path: tuple[str, ...], used: dict[str, int]) -> None:
        path = path + (node,)
        if isinstance(kinds[node], EndNode):
            found.append(path)
            return
        for f in out_flows[node]:
            if (node, f.branch) in looping:
                if used.get(node, 0) >= max_rounds:
                    continue
                walk(f.target, path, {**used, node: used.get(node, 0) + 1})
            else:
                walk(f.target, path, used)

    walk(start, (), {})
    return sorted(found)


def count_tokens_outside_strings(text: str, char: str) -> int:
    count, in_str, escape = 0, False, False
    for ch in text:
        if in_str:
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
        elif ch == char:
            count += 1
    return count
