"""Example-driven rule suggestion.

Seeds each (original, rewritten) example as a degenerate rule, explores
generalizations through the transformation graph (brute force, k-hop
neighborhoods, or adaptive m-promising expansion), and greedily replaces
covered rules with the candidate giving the largest description-length
reduction.  The output set always rewrites every input example to exactly
its target and nothing else.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import nodes as N
from .engine import apply_rule, apply_rule_to_tree, rewrite
from .errors import BudgetExceeded, ExplosionGuard, ParseError
from .mdl import MdlConfig, description_length, total_length
from .nodes import NodeKind, SqlNode
from .parser import parse_query
from .rules import Rule
from .sqlgen import serialize
from .transforms import (
    all_children,
    canonicalize_variables,
    drop_branch,
    drop_targets,
    leaf_targets,
    rule_key,
    subtree_targets,
    variablize_leaf,
    variablize_subtree,
)

INFINITE = math.inf

DEFAULT_MPN_M = 200
DEFAULT_KHN_K = 2
DEFAULT_BF_LIMIT = 50_000


@dataclass(frozen=True)
class RewritePair:
    """One user-given example: the query as generated and as desired."""

    original: SqlNode
    rewritten: SqlNode
    source_text: tuple[str, str] = ("", "")

    def __post_init__(self):
        if not N.is_concrete(self.original) or not N.is_concrete(self.rewritten):
            raise ParseError("rewrite examples must be plain SQL")
        if self.original == self.rewritten:
            raise ParseError("original and rewritten queries are identical")

    @classmethod
    def from_text(cls, original: str, rewritten: str, dialect: str = "generic"):
        return cls(
            original=parse_query(original, dialect),
            rewritten=parse_query(rewritten, dialect),
            source_text=(original, rewritten),
        )

    def as_rule(self, rule_id: int = 0) -> Rule:
        return Rule(
            pattern=self.original,
            replacement=self.rewritten,
            id=rule_id,
            name=f"example-{rule_id}" if rule_id else "example",
        )


@dataclass(frozen=True)
class ExplorerConfig:
    strategy: str = "mpn"  # bf | khn | mpn
    k: int = DEFAULT_KHN_K
    m: int = DEFAULT_MPN_M
    bf_limit: int = DEFAULT_BF_LIMIT

    @classmethod
    def parse(cls, text: str) -> "ExplorerConfig":
        """Parse 'bf', 'khn:K', or 'mpn:M'."""
        text = (text or "mpn").strip().lower()
        if text == "bf":
            return cls(strategy="bf")
        head, _, param = text.partition(":")
        if head == "khn":
            return cls(strategy="khn", k=int(param) if param else DEFAULT_KHN_K)
        if head == "mpn":
            return cls(strategy="mpn", m=int(param) if param else DEFAULT_MPN_M)
        raise ValueError(f"unknown exploration strategy {text!r}")


@dataclass(frozen=True)
class CostConfig:
    beta: float = 1.0
    workload: tuple[SqlNode, ...] = ()
    cost_provider: Callable[[str], float] | None = None

    def __post_init__(self):
        if self.cost_provider is None and self.beta != 1.0:
            raise ValueError("beta must be 1 without a cost provider")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")

    @property
    def cost_aware(self) -> bool:
        return self.cost_provider is not None and self.beta < 1.0


@dataclass
class CandidateRule:
    rule: Rule
    hops: int
    dl: Fraction
    parents: list[tuple[str, str]] = field(default_factory=list)  # (source, kind)


@dataclass
class SuggestionReport:
    rules: list[Rule]
    stats: dict
    details: list[dict] = field(default_factory=list)  # per-rule dl / coverage

    def to_json(self, dialect: str = "generic") -> dict:
        from .rules import rule_to_json

        docs = []
        for index, rule in enumerate(self.rules):
            doc = rule_to_json(rule, dialect)
            if index < len(self.details):
                doc.update(self.details[index])
            docs.append(doc)
        return {"rules": docs, "stats": dict(self.stats)}


# ---------------------------------------------------------------------------
# Covering


def covers(general: Rule, specific: Rule) -> bool:
    """True when general's pattern matches specific's pattern and applying
    general rewrites specific's pattern into specific's replacement."""
    result = apply_rule_to_tree(general, N.fragment_root(specific.pattern))
    if result is None:
        return False
    return result == N.fragment_root(specific.replacement)


def rewrites_pair_wrongly(rule: Rule, pair: RewritePair) -> bool:
    out = apply_rule(rule, pair.original)
    return out is not None and out != pair.rewritten


def rule_set_covers(rules: list[Rule], pairs: list[RewritePair]) -> bool:
    """Every pair is rewritten to exactly its target by at least one rule,
    and no rule rewrites a pair's original to anything different."""
    for pair in pairs:
        hit = False
        for rule in rules:
            out = apply_rule(rule, pair.original)
            if out is None:
                continue
            if out != pair.rewritten:
                return False
            hit = True
        if not hit:
            return False
    return True


# ---------------------------------------------------------------------------
# Distance: transformations needed for a candidate to cover a target rule


@dataclass
class _Plan:
    leaves: dict = field(default_factory=dict)      # key -> leaf target
    subtrees: dict = field(default_factory=dict)    # subtree -> None (ordered set)
    merges: list = field(default_factory=list)      # lists of c-side items
    drops: list = field(default_factory=list)       # clause names / "<unwrap>"

    @property
    def cost(self) -> int:
        return (
            len(self.leaves) + len(self.subtrees) + len(self.merges) + len(self.drops)
        )


def distance(candidate: Rule, target: Rule):
    """Number of transformations for the candidate to cover the target,
    or infinity when no generalization can reproduce the target's rewrite."""
    if covers(candidate, target):
        return 0
    plan = _Plan()
    if not _diff_roots(candidate, target, plan):
        return INFINITE
    generalized = _apply_plan(candidate, plan)
    if generalized is None:
        return INFINITE
    if covers(generalized, target):
        return plan.cost
    return INFINITE


def _diff_roots(candidate: Rule, target: Rule, plan: _Plan) -> bool:
    c_root = N.fragment_root(candidate.pattern)
    t_root = N.fragment_root(target.pattern)
    c_level = N.fragment_level(candidate.pattern)
    t_level = N.fragment_level(target.pattern)
    if c_level == t_level:
        return _diff(c_root, t_root, plan)
    if c_level == N.LEVEL_STATEMENT and t_level in (
        N.LEVEL_PREDICATE, N.LEVEL_EXPRESSION,
    ):
        holder = "WHERE" if t_level == N.LEVEL_PREDICATE else "SELECT"
        holder_clause = N.get_clause(c_root, holder)
        if holder_clause is None or len(holder_clause.children) != 1:
            return False
        for clause in c_root.children:
            if clause.value != holder:
                plan.drops.append(clause.value)
        plan.drops.append("<unwrap>")
        return _diff(holder_clause.children[0], t_root, plan)
    return False


def _diff(c: SqlNode, t: SqlNode, plan: _Plan) -> bool:
    if c == t:
        return True
    ck, tk = c.kind, t.kind
    if ck is NodeKind.VAR_ELEM:
        return tk is not NodeKind.VAR_SET
    if ck is NodeKind.VAR_SET:
        return True
    if tk is NodeKind.VAR_SET:
        return False  # a single fixed position cannot absorb a set atom
    if tk is NodeKind.VAR_ELEM:
        return _plan_variablize(c, plan)
    if tk is NodeKind.STRING_TEMPLATE:
        return _plan_string(c, t, plan)
    if ck is NodeKind.STATEMENT and tk is NodeKind.STATEMENT:
        return _diff_statements(c, t, plan)
    if ck is not tk or c.value != t.value:
        return _plan_variablize(c, plan)
    if ck in (NodeKind.CONJUNCTION, NodeKind.FUNC_CALL, NodeKind.EXPR_LIST):
        if _diff_lists(c.children, t.children, plan):
            return True
        return _plan_variablize(c, plan)
    if ck is NodeKind.CLAUSE:
        return _diff_lists(c.children, t.children, plan)
    if len(c.children) != len(t.children):
        return _plan_variablize(c, plan)
    for c_child, t_child in zip(c.children, t.children):
        if not _diff(c_child, t_child, plan):
            if not _plan_variablize(c, plan):
                return False
            return True
    return True


def _diff_statements(c: SqlNode, t: SqlNode, plan: _Plan) -> bool:
    c_clauses = {cl.value: cl for cl in c.children}
    t_clauses = {cl.value: cl for cl in t.children}
    for cname, clause in c_clauses.items():
        if cname not in t_clauses:
            plan.drops.append(cname)
            continue
        if not _diff(clause, t_clauses[cname], plan):
            return False
    return True


def _diff_lists(c_items, t_items, plan: _Plan) -> bool:
    t_sets = [t for t in t_items if t.kind is NodeKind.VAR_SET]
    t_fixed = [t for t in t_items if t.kind is not NodeKind.VAR_SET]
    remaining = list(c_items)
    for t_item in t_fixed:
        # Prefer an exactly-equal item, else the first generalizable one.
        index = next(
            (i for i, c_item in enumerate(remaining) if c_item == t_item), None
        )
        if index is None:
            index = next(
                (
                    i
                    for i, c_item in enumerate(remaining)
                    if _diff(c_item, t_item, plan)
                ),
                None,
            )
            if index is None:
                return False
        remaining.pop(index)
    if not t_sets:
        if remaining:
            return False
        return True
    if not remaining:
        return True
    if len(remaining) == 1 and remaining[0].kind is NodeKind.VAR_SET:
        return True
    if len(remaining) < 2:
        return False  # cannot merge a single leftover into a set variable
    for item in remaining:
        if item.kind is NodeKind.VAR_ELEM:
            continue
        if not _plan_variablize(item, plan):
            return False
    plan.merges.append(tuple(remaining))
    return True


_LEAFISH = frozenset({NodeKind.COLUMN_REF, NodeKind.TABLE_REF, NodeKind.LITERAL})


def _plan_variablize(c: SqlNode, plan: _Plan) -> bool:
    """Plan leaf (cost 1) or subtree (inner leaves + 1) variablization."""
    if c.kind in (NodeKind.KEYWORD, NodeKind.CLAUSE, NodeKind.STATEMENT,
                  NodeKind.STAR, NodeKind.NAME):
        return False
    if c.kind is NodeKind.LITERAL:
        content = N.string_content(c)
        if content is not None:
            plan.leaves.setdefault(("string", content), ("string", content))
            return True
        plan.leaves.setdefault(("value", c), ("node", c))
        return True
    if c.kind in (NodeKind.COLUMN_REF, NodeKind.TABLE_REF):
        if not N.is_concrete(c):
            return False
        key = ("table", c) if c.kind is NodeKind.TABLE_REF else ("column", c)
        plan.leaves.setdefault(key, ("table", c) if c.kind is NodeKind.TABLE_REF else ("node", c))
        return True
    # Complex element: variablize its instantiated leaves, then the subtree.
    for node in c.walk():
        if node.kind in _LEAFISH and node.kind in (NodeKind.COLUMN_REF, NodeKind.TABLE_REF):
            if N.is_concrete(node):
                key = ("table", node) if node.kind is NodeKind.TABLE_REF else ("column", node)
                target = ("table", node) if node.kind is NodeKind.TABLE_REF else ("node", node)
                plan.leaves.setdefault(key, target)
        elif node.kind is NodeKind.LITERAL:
            content = N.string_content(node)
            if content is not None:
                plan.leaves.setdefault(("string", content), ("string", content))
            else:
                plan.leaves.setdefault(("value", node), ("node", node))
    plan.subtrees.setdefault(c, None)
    return True


def _plan_string(c: SqlNode, t: SqlNode, plan: _Plan) -> bool:
    if c.kind is NodeKind.STRING_TEMPLATE:
        # Templates align when fixed anchors agree position by position.
        if len(c.children) != len(t.children):
            return False
        for c_seg, t_seg in zip(c.children, t.children):
            if (c_seg.kind is NodeKind.TEXT) != (t_seg.kind is NodeKind.TEXT):
                return False
            if c_seg.kind is NodeKind.TEXT and c_seg.value != t_seg.value:
                return False
        return True
    content = N.string_content(c)
    if content is None:
        return False
    pieces = _extract_template_pieces(t, content)
    if pieces is None:
        return False
    for piece in pieces:
        plan.leaves.setdefault(("string", piece), ("string", piece))
    return True


def _extract_template_pieces(template: SqlNode, content: str) -> list[str] | None:
    """Substrings of content that fill the template's variable slots."""
    pieces = []
    pos = 0
    segments = list(template.children)
    for index, seg in enumerate(segments):
        if seg.kind is NodeKind.TEXT:
            if index == len(segments) - 1:
                # Greedy: the variable before a final anchor takes as much
                # content as possible.
                found = content.rfind(seg.value)
                if found < pos:
                    found = -1
            else:
                found = content.find(seg.value, pos)
            if found < 0:
                return None
            if index > 0 and segments[index - 1].kind is not NodeKind.TEXT:
                piece = content[pos:found]
                if not piece:
                    return None
                pieces.append(piece)
            elif found != pos:
                return None
            pos = found + len(seg.value)
        elif index == len(segments) - 1:
            piece = content[pos:]
            if not piece:
                return None
            pieces.append(piece)
            pos = len(content)
    if pos != len(content):
        return None
    return pieces


def _apply_plan(candidate: Rule, plan: _Plan) -> Rule | None:
    """Carry out the planned transformations; all steps skip canonical
    renaming so pending targets remain locatable, then rename once."""
    from .transforms import _fresh_name, leaf_replacer, merge_variables

    rule = canonicalize_variables(candidate)
    for drop in plan.drops:
        if drop not in drop_targets(rule):
            return None
        rule = drop_branch(rule, drop, canonical=False)
        if rule is None:
            return None
    pending = list(plan.subtrees)
    merge_runs = [list(run) for run in plan.merges]
    for target in plan.leaves.values():
        replacer = leaf_replacer(target, _fresh_name(rule))
        rule = variablize_leaf(rule, target, canonical=False)
        if rule is None:
            return None
        pending = [replacer(subtree) for subtree in pending]
        merge_runs = [[replacer(item) for item in run] for run in merge_runs]
    for subtree in pending:
        if subtree not in subtree_targets(rule):
            return None
        var = N.var_elem(_fresh_name(rule))
        rule = variablize_subtree(rule, subtree, canonical=False)
        if rule is None:
            return None
        merge_runs = [
            [var if item == subtree else item for item in run] for run in merge_runs
        ]
    for run in merge_runs:
        if not all(item.kind is NodeKind.VAR_ELEM for item in run):
            return None
        rule = merge_variables(rule, tuple(item.value for item in run), canonical=False)
        if rule is None:
            return None
    return canonicalize_variables(rule)


# ---------------------------------------------------------------------------
# Promisingness


def promisingness(candidate: Rule, base: list[Rule], mdl: MdlConfig | None = None):
    """Score favoring candidates close to covering long base rules and
    cheap to describe themselves; infinite-distance terms contribute zero."""
    mdl = mdl or MdlConfig()
    score = Fraction(1) / description_length(candidate, mdl)
    for target in base:
        dist = distance(candidate, target)
        if dist == INFINITE:
            continue
        score += description_length(target, mdl) / max(dist, 1)
    return score


# ---------------------------------------------------------------------------
# Explorers


def _seed_candidates(rules: list[Rule], mdl: MdlConfig) -> dict:
    out = {}
    for rule in rules:
        canonical = canonicalize_variables(rule)
        key = rule_key(canonical)
        if key not in out:
            out[key] = CandidateRule(canonical, 0, description_length(canonical, mdl))
    return out


def explore_candidates(
    rules: list[Rule],
    explorer: ExplorerConfig,
    mdl: MdlConfig | None = None,
    deadline: float | None = None,
) -> dict:
    """Candidate rules per the configured strategy, keyed structurally."""
    mdl = mdl or MdlConfig()
    if explorer.strategy == "bf":
        return _explore_bf(rules, explorer.bf_limit, mdl, deadline)
    if explorer.strategy == "khn":
        return _explore_khn(rules, explorer.k, mdl, deadline)
    if explorer.strategy == "mpn":
        return _explore_mpn(rules, explorer.m, mdl, deadline)
    raise ValueError(f"unknown exploration strategy {explorer.strategy!r}")


def _check_deadline(deadline):
    if deadline is not None and time.monotonic() > deadline:
        raise BudgetExceeded("suggestion budget exceeded")


def _explore_khn(rules, k, mdl, deadline) -> dict:
    candidates = _seed_candidates(rules, mdl)
    frontier = list(candidates.values())
    for hop in range(1, k + 1):
        _check_deadline(deadline)
        next_frontier = []
        for cand in frontier:
            for kind, child in all_children(cand.rule):
                key = rule_key(child)
                existing = candidates.get(key)
                if existing is None:
                    record = CandidateRule(
                        child, hop, description_length(child, mdl),
                        [(serialize(cand.rule.pattern), kind)],
                    )
                    candidates[key] = record
                    next_frontier.append(record)
                else:
                    existing.parents.append((serialize(cand.rule.pattern), kind))
        frontier = next_frontier
        if not frontier:
            break
    return candidates


def _explore_bf(rules, limit, mdl, deadline) -> dict:
    candidates = _seed_candidates(rules, mdl)
    frontier = list(candidates.values())
    hop = 0
    while frontier:
        hop += 1
        _check_deadline(deadline)
        next_frontier = []
        for cand in frontier:
            for kind, child in all_children(cand.rule):
                key = rule_key(child)
                if key in candidates:
                    candidates[key].parents.append(
                        (serialize(cand.rule.pattern), kind)
                    )
                    continue
                record = CandidateRule(
                    child, hop, description_length(child, mdl),
                    [(serialize(cand.rule.pattern), kind)],
                )
                candidates[key] = record
                next_frontier.append(record)
                if len(candidates) > limit:
                    raise ExplosionGuard(
                        f"brute-force exploration exceeded {limit} candidates"
                    )
        frontier = next_frontier
    return candidates


def _explore_mpn(rules, m, mdl, deadline) -> dict:
    base = list(rules)
    seeds = _seed_candidates(rules, mdl)
    seen = dict(seeds)
    heap = []
    counter = 0
    for key, cand in seeds.items():
        heapq.heappush(heap, (-promisingness(cand.rule, base, mdl), counter, key))
        counter += 1
    active = dict(seeds)
    while len(active) < m and heap:
        _check_deadline(deadline)
        _, _, key = heapq.heappop(heap)
        popped = active.pop(key, None)
        if popped is None:
            continue  # stale heap entry
        for kind, child in all_children(popped.rule):
            child_key = rule_key(child)
            if child_key in seen:
                seen[child_key].parents.append(
                    (serialize(popped.rule.pattern), kind)
                )
                continue
            record = CandidateRule(
                child, popped.hops + 1, description_length(child, mdl),
                [(serialize(popped.rule.pattern), kind)],
            )
            seen[child_key] = record
            active[child_key] = record
            heapq.heappush(
                heap, (-promisingness(child, base, mdl), counter, child_key)
            )
            counter += 1
    return seen


# ---------------------------------------------------------------------------
# Greedy suggestion


def suggest_rules(
    pairs: list[RewritePair],
    explorer: ExplorerConfig | None = None,
    mdl: MdlConfig | None = None,
    cost: CostConfig | None = None,
    budget_ms: int | None = None,
) -> SuggestionReport:
    """Greedy minimum-description-length rule suggestion."""
    if not pairs:
        raise ParseError("at least one rewrite example is required")
    explorer = explorer or ExplorerConfig()
    mdl = mdl or MdlConfig()
    cost = cost or CostConfig()
    start = time.monotonic()
    deadline = start + budget_ms / 1000.0 if budget_ms else None

    working = [canonicalize_variables(p.as_rule(i + 1)) for i, p in enumerate(pairs)]
    seed_keys = {rule_key(r) for r in working}
    before = total_length(working, mdl)
    iterations = 0
    candidates_explored = 0
    explored_keys: set = set()

    def partial_stats():
        return {
            "candidates_explored": candidates_explored,
            "iterations": iterations,
            "total_dl_before": float(before),
            "wall_time_ms": int((time.monotonic() - start) * 1000),
        }

    try:
        while True:
            iterations += 1
            candidates = explore_candidates(working, explorer, mdl, deadline)
            candidates_explored += len(candidates)
            explored_keys.update(candidates.keys())
            best = _pick_candidate(candidates, working, pairs, mdl, cost, deadline)
            if best is None:
                break
            chosen, covered = best
            working = [r for r in working if r not in covered] + [chosen]
    except BudgetExceeded as exc:
        raise BudgetExceeded(str(exc), partial_stats()) from exc

    working = _finish_seed_generalization(working, seed_keys, explored_keys, pairs)

    out = []
    seen_keys = set()
    for index, rule in enumerate(working):
        key = rule_key(rule)
        if key in seen_keys:
            continue
        seen_keys.add(key)
        out.append(rule.with_fields(id=index + 1, name=f"suggested-{index + 1}"))
    stats = partial_stats()
    stats["total_dl_after"] = float(total_length(out, mdl))
    details = [
        {
            "dl": float(description_length(rule, mdl)),
            "covers": [
                index
                for index, pair in enumerate(pairs)
                if apply_rule(rule, pair.original) == pair.rewritten
            ],
        }
        for rule in out
    ]
    return SuggestionReport(out, stats, details)


def _pick_candidate(candidates, working, pairs, mdl, cost, deadline):
    """Candidate with the largest benefit, or None when nothing improves.

    Candidates that would rewrite any example's original to something other
    than its target are disqualified outright: they could never appear in a
    covering rule set.
    """
    working_total = total_length(working, mdl)
    base_cost = _workload_cost(working, cost) if cost.cost_aware else None
    best_score = None
    best = None
    ordered = sorted(
        candidates.values(),
        key=lambda c: (serialize(c.rule.pattern), serialize(c.rule.replacement)),
    )
    for cand in ordered:
        _check_deadline(deadline)
        covered = [r for r in working if covers(cand.rule, r)]
        if not covered:
            continue
        if any(rewrites_pair_wrongly(cand.rule, pair) for pair in pairs):
            continue
        delta_l = sum(description_length(r, mdl) for r in covered) - cand.dl
        if cost.cost_aware:
            trial = [r for r in working if r not in covered] + [cand.rule]
            delta_c = base_cost - _workload_cost(trial, cost)
            benefit = float(
                cost.beta * float(delta_l) / float(working_total)
                + (1.0 - cost.beta) * (delta_c / base_cost if base_cost else 0.0)
            )
        else:
            benefit = delta_l
        score = (benefit, len(covered), -cand.dl)
        if best_score is None or score > best_score:
            best_score = score
            best = (cand.rule, covered)
    if best is None or best_score[0] <= 0:
        return None
    return best


def _workload_cost(rules: list[Rule], cost: CostConfig) -> float:
    total = 0.0
    for query in cost.workload:
        original_text = serialize(query)
        result, _ = rewrite(query, rules)
        try:
            total += float(cost.cost_provider(serialize(result)))
        except Exception:
            try:
                total += float(cost.cost_provider(original_text))
            except Exception:
                total += 0.0
    return total


def _finish_seed_generalization(working, seed_keys, explored_keys, pairs):
    """Replace surviving raw example rules with their canonical safe
    generalization when exploration actually reached it."""
    out = list(working)
    for index, rule in enumerate(out):
        if rule_key(rule) not in seed_keys:
            continue
        general = canonical_generalization(rule)
        if general is None or rule_key(general) == rule_key(rule):
            continue
        if rule_key(general) not in explored_keys:
            continue
        trial = out[:index] + [general] + out[index + 1 :]
        if rule_set_covers(trial, pairs):
            out[index] = general
    return out


def canonical_generalization(rule: Rule) -> Rule | None:
    """Drop every clause shared by pattern and replacement, then variablize
    every leaf that carries over from the matched side to the rewritten
    side.  The parts that stay concrete are exactly the transformation
    logic; the parts that vary are the data being moved."""
    current = rule
    while True:
        targets = drop_targets(current)
        if not targets:
            break
        current = drop_branch(current, targets[0]) or current
    while True:
        shared = [
            target
            for target in leaf_targets(current)
            if _leaf_in_replacement(current, target)
        ]
        if not shared:
            break
        nxt = variablize_leaf(current, shared[0])
        if nxt is None:
            break
        current = nxt
    if rule_key(current) == rule_key(rule):
        return None
    return current


def _leaf_in_replacement(rule: Rule, target) -> bool:
    replacement = N.fragment_root(rule.replacement)
    kind, payload = target
    if kind == "string":
        for node in replacement.walk():
            content = N.string_content(node) if node.kind is NodeKind.LITERAL else None
            if content is not None and payload in content:
                return True
        return False
    if kind == "table":
        effective = N.effective_name_node(payload)
        for node in replacement.walk():
            if node == payload:
                return True
            if (
                node.kind is NodeKind.COLUMN_REF
                and len(node.children) == 2
                and node.children[0].kind is NodeKind.NAME
                and N.names_equal(node.children[0], effective)
            ):
                return True
        return False
    return any(node == payload for node in replacement.walk())
