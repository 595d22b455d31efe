"""Random valid process models for property and round-trip tests."""
from __future__ import annotations

import random

from bore.model import (
    AutomationLabel,
    DecisionGateway,
    EndNode,
    Flow,
    ModelKind,
    ProcessModel,
    Role,
    StartNode,
    Task,
)

_TITLE_CHARS = 'abcdefghij XYZ-_.,"\\\'#{}[]=éü→'


def _title(rng: random.Random) -> str:
    return "".join(rng.choice(_TITLE_CHARS) for _ in range(rng.randint(1, 12)))


def random_model(
    rng: random.Random,
    max_nodes: int = 40,
    labeled: bool = False,
    max_gateways: int | None = None,
    shuffle: bool = True,
) -> ProcessModel:
    """Build a clean model: a spine start -> n1 -> ... -> end plus extra gateway branches.

    The spine makes every node reachable from the start and lets every node
    reach an end; extra branches may point anywhere, including backwards.
    """
    n_roles = rng.randint(1, 4)
    roles = [Role(f"r{i}", _title(rng) if rng.random() < 0.7 else None) for i in range(1, n_roles + 1)]
    n_ends = rng.randint(1, 3)
    n_inner = rng.randint(1, max_nodes - 1 - n_ends)

    inner = []
    gateways = 0
    for i in range(1, n_inner + 1):
        gw_ok = max_gateways is None or gateways < max_gateways
        if gw_ok and rng.random() < 0.25:
            gateways += 1
            inner.append(DecisionGateway(f"g{i}", _title(rng), rng.choice(roles).id))
        else:
            task_roles = tuple(rng.sample([r.id for r in roles], rng.randint(1, min(2, n_roles))))
            label = rng.choice(list(AutomationLabel)) if labeled else None
            inner.append(Task(f"t{i}", _title(rng), task_roles, label))
    start = StartNode("s0", _title(rng) if rng.random() < 0.5 else None)
    ends = [EndNode(f"e{i}", _title(rng) if rng.random() < 0.5 else None) for i in range(1, n_ends + 1)]

    gws = [n for n in inner if isinstance(n, DecisionGateway)]
    if not gws:
        ends = ends[:1]
    chain = [start] + inner + [ends[0]]
    flows = []
    extra: dict[str, list[str]] = {g.id: [] for g in gws}
    for e in ends[1:]:
        extra[rng.choice(gws).id].append(e.id)
    targets = [n.id for n in inner] + [e.id for e in ends]
    for pos, (here, nxt) in enumerate(zip(chain, chain[1:])):
        if isinstance(here, DecisionGateway):
            # A backward branch may only jump over tasks, so no loop ever
            # encloses another gateway's spine branch and every gateway keeps
            # one branch that cannot lead back to it.
            back = []
            for k in range(pos, 0, -1):
                back.append(chain[k].id)
                if isinstance(chain[k - 1], DecisionGateway):
                    break
            candidates = targets[pos:] + back
            outs = [nxt.id] + extra[here.id]
            while len(outs) < 2 or (len(outs) < 3 and rng.random() < 0.3):
                outs.append(rng.choice(candidates))
            for k, tgt in enumerate(outs):
                flows.append(Flow(here.id, tgt, f"b{k}"))
        else:
            flows.append(Flow(here.id, nxt.id))

    nodes = inner + [start] + ends
    if shuffle:
        rng.shuffle(nodes)
        rng.shuffle(flows)
        rng.shuffle(roles)
    return ProcessModel(
        name=_title(rng),
        roles=tuple(roles),
        nodes=tuple(nodes),
        flows=tuple(flows),
        kind=ModelKind.TOBE if labeled else ModelKind.ASIS,
    )
