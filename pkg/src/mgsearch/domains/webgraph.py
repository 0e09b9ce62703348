"""Synthetic stand-in for a focused-crawling corpus.

Pages belong to sites.  Most sites are generic; a few "department" sites
host list pages (hubs) that link to clusters of home pages, which are the
goals.  Links prefer pages of the same site and, across sites, popular pages
with a similar topic mix (homophilic preferential attachment).  Every page
carries a topic-mixture feature vector; coordinate ``goal_topic`` is high
exactly on home pages, and goal labels are defined by a threshold on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import InvalidParameterError, SearchProblem, StateSpace
from ..search import Scorer
from .graphfile import ExplicitGraph


@dataclass(frozen=True)
class WebGraphParams:
    n_nodes: int = 30000
    mean_degree: float = 10.6
    topic_dims: int = 8
    goal_topic: int = 0
    goal_rate: float = 0.01
    site_size: float = 60.0  # mean pages per site
    department_share: float = 0.8  # fraction of goals that sit under hubs
    goals_per_hub: int = 8
    hubs_per_department: int = 4
    academic_share: float = 0.2  # generic sites with a mild goal-topic pull
    loose_in_links: int = 3
    root_in_links: int = 60  # academic pages linking to each department root
    root_goals: int = 0  # home pages linked straight from a department root
    colleague_link: float = 0.3  # chance a home page links to another home page
    in_site: float = 0.8  # probability a link stays inside its site
    academic_pull: float = 0.05  # goal-topic mass of academic sites
    department_pull: float = 0.07  # goal-topic mass of department sites (hubs excluded)
    noise: float = 0.3
    candidates: int = 8  # preferential-attachment candidates per cross-site link


@dataclass(frozen=True)
class SyntheticWebGraph:
    graph: ExplicitGraph
    params: WebGraphParams
    threshold: float
    site: np.ndarray
    role: np.ndarray  # 0 page, 1 department root, 2 hub, 3 home page

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def goals(self) -> np.ndarray:
        return self.graph.goals

    @property
    def features(self) -> np.ndarray:
        return self.graph.features

    def space(self) -> StateSpace:
        return self.graph.space(name="web")

    def problem(self, starts, limit: Optional[int] = None) -> SearchProblem:
        return SearchProblem(self.space(), tuple(int(s) for s in starts), limit)

    def random_starts(self, count: int = 5, seed: int = 0) -> tuple:
        """Non-goal start pages drawn uniformly."""
        rng = np.random.default_rng(seed)
        pool = np.flatnonzero(~self.goals)
        return tuple(int(v) for v in rng.choice(pool, size=min(count, len(pool)), replace=False))


def _mix(rng, dims, goal_topic, goal_mass, concentration=0.5):
    v = rng.dirichlet(np.full(dims - 1, concentration))
    out = np.insert(v * (1.0 - goal_mass), goal_topic, goal_mass)
    return out


def synthetic_web_graph(
    n_nodes: int = 30000,
    mean_degree: float = 10.6,
    topic_dims: int = 8,
    goal_topic: int = 0,
    goal_rate: float = 0.01,
    seed: int = 0,
    **overrides,
) -> SyntheticWebGraph:
    p = WebGraphParams(n_nodes, mean_degree, topic_dims, goal_topic, goal_rate, **overrides)
    if p.n_nodes < 1:
        raise InvalidParameterError("need at least one node")
    if not 0.0 <= p.goal_rate < 1.0:
        raise InvalidParameterError("goal rate must lie in [0, 1)")
    if p.topic_dims < 2 or not 0 <= p.goal_topic < p.topic_dims:
        raise InvalidParameterError("need >= 2 topic dimensions and a valid goal topic")
    rng = np.random.default_rng(seed)
    n = p.n_nodes
    n_goals = int(round(p.goal_rate * n))

    # roles: departments (root, hubs, home pages) carved out first
    role = np.zeros(n, dtype=np.int8)
    site = np.full(n, -1, dtype=np.int64)
    per_dept = p.hubs_per_department * p.goals_per_hub
    n_depts = int(p.department_share * n_goals) // per_dept if per_dept else 0
    hub_goals: dict[int, list[int]] = {}
    dept_hubs: dict[int, list[int]] = {}
    nxt = 0
    for s in range(n_depts):
        need = 1 + p.hubs_per_department * (1 + p.goals_per_hub)
        if nxt + need > n:
            break
        root = nxt
        role[root] = 1
        site[root] = s
        nxt += 1
        dept_hubs[root] = []
        for _ in range(p.hubs_per_department):
            h = nxt
            role[h] = 2
            site[h] = s
            nxt += 1
            dept_hubs[root].append(h)
            hub_goals[h] = list(range(nxt, nxt + p.goals_per_hub))
            role[nxt : nxt + p.goals_per_hub] = 3
            site[nxt : nxt + p.goals_per_hub] = s
            nxt += p.goals_per_hub
    n_depts = len(dept_hubs)
    placed_goals = int((role == 3).sum())
    # remaining pages are spread over sites; department sites get extra pages
    rest = np.arange(nxt, n)
    n_sites = max(n_depts + 1, int(round(n / p.site_size)))
    sizes = rng.pareto(1.5, n_sites) + 1.0
    site[rest] = rng.choice(n_sites, size=len(rest), p=sizes / sizes.sum())
    academic = np.zeros(n_sites, dtype=bool)
    academic[:n_depts] = True
    generic_sites = np.arange(n_depts, n_sites)
    n_acad = int(round(p.academic_share * len(generic_sites)))
    academic[rng.choice(generic_sites, size=n_acad, replace=False)] = True
    # loose home pages live on academic sites (any generic site if there are none)
    loose = max(0, n_goals - placed_goals)
    hosts = rest[academic[site[rest]] & (site[rest] >= n_depts)]
    if loose > len(hosts):
        hosts = rest[site[rest] >= n_depts]
    if loose > len(hosts):
        raise InvalidParameterError("goal rate too high for the requested graph size")
    role[rng.choice(hosts, size=loose, replace=False)] = 3

    # features
    site_topic = np.array(
        [
            _mix(rng, p.topic_dims, p.goal_topic, p.department_pull if s < n_depts else p.academic_pull if academic[s] else 0.0)
            for s in range(n_sites)
        ]
    )
    noise = rng.dirichlet(np.full(p.topic_dims, 0.5), size=n)
    feats = (1.0 - p.noise) * site_topic[site] + p.noise * noise
    gt = p.goal_topic
    feats[:, gt] = np.minimum(feats[:, gt], 0.45)
    home = np.flatnonzero(role == 3)
    feats[home, gt] = rng.uniform(0.55, 0.9, size=len(home))
    others = np.delete(np.arange(p.topic_dims), gt)
    rem = feats[:, others]
    rem = rem / rem.sum(axis=1, keepdims=True) * (1.0 - feats[:, [gt]])
    feats[:, others] = rem

    # links: home pages are never free-link targets, so they do not flock;
    # department home pages are reached through their hubs only
    is_goal = role == 3
    members: dict[int, np.ndarray] = {}
    order = np.argsort(site, kind="stable")
    order = order[role[order] == 0]
    bounds = np.searchsorted(site[order], np.arange(n_sites + 1))
    for s_ in range(n_sites):
        members[s_] = order[bounds[s_] : bounds[s_ + 1]]
    targets = np.flatnonzero(role == 0)
    indeg = np.ones(n)
    succ: list[list[int]] = [[] for _ in range(n)]
    for root, hubs in dept_hubs.items():
        succ[root].extend(hubs)
        succ[root].extend(hub_goals[h][0] for h in hubs[: p.root_goals])
        for h in hubs:
            succ[h].extend(hub_goals[h])
            for g in hub_goals[h]:
                succ[g].extend((h, root))
    for g in home[site[home] >= n_depts] if n_depts else home:
        pool = members[int(site[g])]
        if len(pool) == 0:
            pool = targets
        for u in rng.choice(pool, size=min(p.loose_in_links, len(pool)), replace=False):
            succ[int(u)].append(int(g))
    for g in home:
        if rng.random() < p.colleague_link and len(home) > 1:
            v = int(home[rng.integers(len(home))])
            if v != g and v not in succ[g]:
                succ[g].append(v)
    acad_pages = targets[academic[site[targets]] & (site[targets] >= n_depts)]
    if len(acad_pages) == 0:
        acad_pages = targets
    for root in dept_hubs:
        for u in rng.choice(acad_pages, size=min(p.root_in_links, len(acad_pages)), replace=False):
            if root not in succ[int(u)]:
                succ[int(u)].append(root)
                indeg[root] += 1
    structural = sum(len(s_) for s_ in succ)
    free_links = max(0, int(round(p.mean_degree * n)) - structural)
    # department roots and hubs only carry their structural links
    linkers = np.flatnonzero(role == 0) if n_depts else np.arange(n)
    linkers = np.union1d(linkers, home)
    deg = np.zeros(n, dtype=np.int64)
    deg[linkers] = rng.poisson(free_links / len(linkers), size=len(linkers))
    # fix the total exactly
    diff = free_links - int(deg.sum())
    if diff:
        idx = rng.choice(linkers, size=abs(diff), replace=True)
        np.add.at(deg, idx, 1 if diff > 0 else -1)
        deg = np.maximum(deg, 0)
    for u in rng.permutation(n):
        k = int(deg[u])
        if k == 0:
            continue
        pool = members[int(site[u])]
        chosen = set(succ[u])
        added = 0
        for _ in range(4 * k):
            if added == k:
                break
            if len(pool) > 1 and rng.random() < p.in_site:
                w = indeg[pool]
                v = int(pool[np.searchsorted(np.cumsum(w), rng.random() * w.sum())])
            else:
                cand = targets[rng.integers(len(targets), size=p.candidates)]
                keep = cand[rng.random(p.candidates) < indeg[cand] / indeg[cand].max()]
                cand = keep if len(keep) else cand[:1]
                v = int(cand[int(np.argmax(feats[cand] @ feats[u]))])
            if v != u and v not in chosen:
                chosen.add(v)
                succ[u].append(v)
                indeg[v] += 1
                added += 1

    for lst in succ:
        rng.shuffle(lst)
    goals = feats[:, gt] >= 0.5
    if n_goals == 0:
        goals[:] = False
    graph = ExplicitGraph(tuple(tuple(s) for s in succ), goals, feats)
    return SyntheticWebGraph(graph, p, 0.5, site, role)


class TopicDistanceScorer(Scorer):
    """Cosine distance between a page's topic mixture and the goal topic."""

    def __init__(self, goal_topic: int = 0):
        self.goal_topic = goal_topic

    def score(self, ids):
        fx = self.ctx.space.features
        states = self.ctx.graph.states
        X = np.array([fx(states[i]) for i in ids], dtype=np.float64)
        if len(X) == 0:
            return np.zeros(0)
        return 1.0 - X[:, self.goal_topic] / np.maximum(np.linalg.norm(X, axis=1), 1e-12)
