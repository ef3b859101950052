"""Network graphs and deterministic destination routing.

Two shapes are supported: k-ary fat trees (k^levels endpoints under `levels`
tiers of k^(levels-1) switches each) and a single radix-n switch. All links
are full duplex with a uniform rate and propagation delay.

Fat-tree addressing: endpoints are base-k numbers with `levels` digits;
switches are (tier, index) with index a base-k number of levels-1 digits.
A tier-l switch connects upward to the k tier-(l+1) switches whose index
agrees on every digit except digit l. Routing is deterministic d-mod-k:
at tier l the port toward destination d is digit l of d, going down when
the destination lies in the switch's subtree and up otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

ENDPOINT = "endpoint"
SWITCH = "switch"


class TopologyError(Exception):
    pass


@dataclass(frozen=True)
class Node:
    id: int
    role: str
    radix: int
    level: int = -1  # fat-tree tier for switches (0 = leaf)
    index: int = -1  # position within the tier


@dataclass(frozen=True)
class Link:
    id: int
    a_node: int
    a_port: int
    b_node: int
    b_port: int
    rate_bps: int
    prop_ns: int


class Topology:
    def __init__(self, kind, nodes, links, k=0, levels=0):
        self.kind = kind
        self.k = k
        self.levels = levels
        self.nodes = {n.id: n for n in nodes}
        self.links = list(links)
        self.endpoints = sorted(n.id for n in nodes if n.role == ENDPOINT)
        self.switches = sorted(n.id for n in nodes if n.role == SWITCH)
        self.port_map = {}
        for ln in self.links:
            for node, port, side in ((ln.a_node, ln.a_port, 0), (ln.b_node, ln.b_port, 1)):
                key = (node, port)
                if key in self.port_map:
                    raise TopologyError(f"port {key} appears in more than one link")
                self.port_map[key] = (ln.id, side)
        self._check_connected()
        if len(self.endpoints) < 2:
            raise TopologyError("need at least 2 endpoints")

    def peer(self, node, port):
        """(node, port) on the far side of the link attached here."""
        link_id, side = self.port_map[(node, port)]
        ln = self.links[link_id]
        if side == 0:
            return ln.b_node, ln.b_port
        return ln.a_node, ln.a_port

    def _check_connected(self):
        if not self.nodes:
            raise TopologyError("empty topology")
        adj = {nid: [] for nid in self.nodes}
        for ln in self.links:
            adj[ln.a_node].append(ln.b_node)
            adj[ln.b_node].append(ln.a_node)
        seen = set()
        stack = [next(iter(self.nodes))]
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            stack.extend(adj[nid])
        if len(seen) != len(self.nodes):
            raise TopologyError("graph is not connected")


def _digit(x, pos, k):
    return (x // k**pos) % k


def _set_digit(x, pos, k, value):
    return x + (value - _digit(x, pos, k)) * k**pos


def build_single_switch(n, rate_bps, prop_ns):
    """One radix-n switch with endpoint i on switch port i."""
    if n < 2:
        raise TopologyError(f"single switch needs n >= 2, got {n}")
    nodes = [Node(i, ENDPOINT, 1) for i in range(n)]
    nodes.append(Node(n, SWITCH, n))
    links = [Link(i, i, 0, n, i, rate_bps, prop_ns) for i in range(n)]
    return Topology("single_switch", nodes, links)


def build_fat_tree(k, levels, rate_bps, prop_ns, max_endpoints=4096):
    """k-ary `levels`-tree: k^levels endpoints, levels tiers of k^(levels-1) switches.

    Switch ports 0..k-1 go down, k..2k-1 go up; the top tier has no up ports.
    """
    if k < 2 or levels < 1:
        raise TopologyError(f"fat tree needs k >= 2 and levels >= 1, got k={k}, levels={levels}")
    n_end = k**levels
    if n_end > max_endpoints:
        raise TopologyError(f"{n_end} endpoints exceeds max_endpoints={max_endpoints}")
    per_tier = k ** (levels - 1)
    nodes = [Node(i, ENDPOINT, 1) for i in range(n_end)]

    def sw_id(tier, w):
        return n_end + tier * per_tier + w

    for tier in range(levels):
        radix = k if tier == levels - 1 else 2 * k
        nodes.extend(Node(sw_id(tier, w), SWITCH, radix, tier, w) for w in range(per_tier))

    links = []
    for p in range(n_end):
        links.append(Link(len(links), p, 0, sw_id(0, p // k), p % k, rate_bps, prop_ns))
    for tier in range(levels - 1):
        for w in range(per_tier):
            down_port = _digit(w, tier, k)  # index at the upper switch
            for j in range(k):
                upper = _set_digit(w, tier, k, j)
                links.append(
                    Link(len(links), sw_id(tier, w), k + j, sw_id(tier + 1, upper), down_port,
                         rate_bps, prop_ns)
                )
    return Topology("fat_tree", nodes, links, k=k, levels=levels)


def build_routing(topo):
    """Full routing table: per switch, destination endpoint -> output port."""
    table = {}
    if topo.kind == "single_switch":
        sw = topo.switches[0]
        table[sw] = {p: p for p in topo.endpoints}
        return table
    k, levels = topo.k, topo.levels
    for sid in topo.switches:
        node = topo.nodes[sid]
        tier, w = node.level, node.index
        ports = {}
        for dst in topo.endpoints:
            covered = dst // k ** (tier + 1) == w // k**tier
            port = _digit(dst, tier, k)
            ports[dst] = port if covered else k + port
        table[sid] = ports
    return table


def route_next_hop(table, at, dst):
    try:
        return table[at][dst]
    except KeyError:
        raise TopologyError(f"no route from switch {at} to endpoint {dst}") from None
