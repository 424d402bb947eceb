"""Arena-backed search tree: nodes, edges, expansion, and backup."""

from __future__ import annotations

from typing import Optional

from .config import CostCounter, SearchConfig
from .envs.base import Environment, InvalidActionError
from .evaluators import CountingEvaluator, Evaluator
from .gumbel import floored_log


class Edge:
    __slots__ = ("action_text", "prior", "log_prior", "visit_count", "mean_value", "child")

    def __init__(self, action_text: str, prior: float, log_prior: float, child: int):
        self.action_text = action_text
        self.prior = prior
        self.log_prior = log_prior
        self.visit_count = 0
        # carries the child's initial evaluator value until the first backup
        self.mean_value = 0.0
        self.child = child


class Node:
    __slots__ = ("state", "text", "depth", "is_terminal", "reward",
                 "value_eval", "children", "parent")

    def __init__(self, state, text: str, depth: int, is_terminal: bool,
                 reward: float, parent: Optional[tuple[int, int]]):
        self.state = state
        self.text = text
        self.depth = depth
        self.is_terminal = is_terminal
        self.reward = reward
        self.value_eval: Optional[float] = None
        self.children: Optional[list[Edge]] = None  # None until expanded
        self.parent = parent  # (parent node id, action index)

    @property
    def expanded(self) -> bool:
        return self.children is not None


class SearchTree:
    """One search's mutable state; owned by exactly one thread of control.

    The root is expanded on construction so root selection always has
    candidates. ``cost`` tallies every evaluator call made on behalf of
    this tree.
    """

    def __init__(self, root_state, env: Environment, evaluator: Evaluator,
                 config: SearchConfig):
        self.env = env
        self.config = config
        self.cost = CostCounter()
        if hasattr(evaluator, "bind_counter"):
            # caching layer counts only the calls that reach the backend
            evaluator.bind_counter(self.cost)
            self.evaluator = evaluator
        else:
            self.evaluator = CountingEvaluator(evaluator, self.cost)
        self.nodes: list[Node] = []
        self.nodes_expanded = 0
        self.backup_log: list[tuple[int, int, float]] | None = (
            [] if config.record_backups else None)

        if env.is_terminal(root_state):
            raise ValueError("cannot search from a terminal state")
        root = Node(root_state, env.canonical_text(root_state), depth=0,
                    is_terminal=False, reward=env.reward(root_state), parent=None)
        self.nodes.append(root)
        self.expand(0)
        if not self.nodes[0].children:
            raise ValueError(
                f"root {root.text!r} has no expandable actions")

    @property
    def root(self) -> Node:
        return self.nodes[0]

    def node(self, node_id: int) -> Node:
        return self.nodes[node_id]

    def expand(self, node_id: int) -> list[Edge]:
        """Propose w actions, merge duplicate texts, renormalize priors, and
        create one evaluated child per kept action.

        A node that turns out to have no legal actions is converted to a
        terminal carrying the environment reward.
        """
        node = self.nodes[node_id]
        if node.expanded:
            raise RuntimeError(f"node {node_id} already expanded")
        if node.is_terminal:
            raise RuntimeError(f"node {node_id} is terminal")
        if node.depth >= self.config.max_depth:
            raise RuntimeError(f"node {node_id} is at the depth cap")

        proposals = self.evaluator.propose(node.text, self.config.expansion_width)
        merged: dict[str, float] = {}
        order: list[str] = []
        for p in proposals:
            if p.action_text not in merged:
                merged[p.action_text] = 0.0
                order.append(p.action_text)
            merged[p.action_text] += p.raw_prob

        kept: list[tuple[str, object, float]] = []
        for text in order:
            try:
                next_state = self.env.step(node.state, text)
            except InvalidActionError:
                continue
            kept.append((text, next_state, merged[text]))

        if not kept:
            node.is_terminal = True
            node.children = None
            return []

        total = sum(raw for _, _, raw in kept)
        node.children = []
        for index, (text, next_state, raw) in enumerate(kept):
            prior = raw / total if total > 0 else 1.0 / len(kept)
            child = self._make_child(node_id, index, next_state)
            edge = Edge(text, prior, floored_log(prior), child)
            edge.mean_value = self.nodes[child].value_eval
            node.children.append(edge)
        self.nodes_expanded += 1
        return node.children

    def _make_child(self, parent_id: int, action_index: int, state) -> int:
        parent = self.nodes[parent_id]
        terminal = self.env.is_terminal(state)
        child = Node(state, self.env.canonical_text(state), parent.depth + 1,
                     terminal, self.env.reward(state), (parent_id, action_index))
        if terminal:
            child.value_eval = child.reward
        else:
            child.value_eval = self.evaluator.value(child.text)
        self.nodes.append(child)
        return len(self.nodes) - 1

    def backpropagate(self, path: list[tuple[int, int]], v_leaf: float) -> None:
        """Running-mean update of every edge on the root-to-leaf path."""
        for node_id, action_index in path:
            edge = self.nodes[node_id].children[action_index]
            n = edge.visit_count
            edge.mean_value = (edge.mean_value * n + v_leaf) / (n + 1)
            edge.visit_count = n + 1
            if self.backup_log is not None:
                self.backup_log.append((node_id, action_index, v_leaf))

    # -- views used by the selection math -----------------------------------

    def child_arrays(self, node_id: int):
        edges = self.nodes[node_id].children
        priors = [e.prior for e in edges]
        visits = [e.visit_count for e in edges]
        means = [e.mean_value for e in edges]
        values = [self.nodes[e.child].value_eval for e in edges]
        return priors, visits, means, values

    def dump(self) -> str:
        """One node per line: id, parent id, incoming action/edge stats.

        The format is the determinism fixture: two identical runs must
        produce byte-identical dumps.
        """
        lines = []
        for node_id, node in enumerate(self.nodes):
            if node.parent is None:
                parent_id, text, visits, mean, prior = -1, "", 0, "", ""
            else:
                parent_id, action_index = node.parent
                edge = self.nodes[parent_id].children[action_index]
                text = edge.action_text
                visits = edge.visit_count
                mean = repr(edge.mean_value)
                prior = repr(edge.prior)
            value_eval = "" if node.value_eval is None else repr(node.value_eval)
            lines.append("\t".join([
                str(node_id), str(parent_id), text, str(node.depth),
                str(visits), str(mean), str(prior), value_eval,
                "1" if node.is_terminal else "0",
            ]))
        return "\n".join(lines) + "\n"
