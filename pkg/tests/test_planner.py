import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from v2g_audit.checks import FUNCTIONS
from v2g_audit.errors import NoTemplateMatch, UnknownRegion
from v2g_audit.graph import NodeKind, PropertyGraph, make_graph
from v2g_audit.planner import (
    DEFAULT_REGISTRY,
    HTTPPlannerClient,
    Registry,
    Rule,
    StructuredQuery,
    TransportError,
    load_rules,
    plan,
    plan_with_client,
    select_region,
)

GROUNDING_RULE = Rule("MP", "Every CT secondary must connect to exactly one ground", "Grounding")


def test_grounding_rule_mapping():
    q = plan(GROUNDING_RULE)
    assert (q.region, q.function) == ("CT_secondary", "check_grounding_uniqueness")


def test_unique_ids_mapping():
    q = plan(Rule("DI", "All terminals must carry unique IDs", "Labeling"))
    assert (q.region, q.function) == ("terminal_strip", "check_terminal_ids_duplicate")


def test_no_template():
    with pytest.raises(NoTemplateMatch):
        plan(Rule("X", "Paint all wires blue", "Wiring"))


def test_golden_table(rules, golden_dir):
    golden = json.loads((golden_dir / "planner_table.json").read_text())
    assert sorted(r.id for r in rules) == sorted(golden)
    for r in rules:
        q = plan(r)
        assert golden[r.id]["text"] == r.text
        assert (q.region, q.function) == (golden[r.id]["region"], golden[r.id]["function"])


def test_plans_only_registered_names(rules):
    for r in rules:
        q = plan(r)
        assert q.function in FUNCTIONS and DEFAULT_REGISTRY.has_region(q.region)


def test_rule_category_validated():
    with pytest.raises(ValueError):
        Rule("Z", "whatever", "Plumbing")


def test_empty_registry():
    with pytest.raises(ValueError):
        plan(GROUNDING_RULE, Registry(functions=()))


# -- regions -----------------------------------------------------------------


def test_region_whole_is_identity():
    g = make_graph([(0, 1)])
    assert select_region(g, "whole") is g


def test_region_ct_secondary():
    kinds = {0: NodeKind.CURRENT_TRANSFORMER, 1: NodeKind.BREAKER, 2: NodeKind.TERMINAL, 3: NodeKind.GROUND}
    g = make_graph([(0, 1), (1, 2), (2, 3), (4, 5), (5, 6)], kinds=kinds)
    sub = select_region(g, "CT_secondary")
    assert [n.id for n in sub.nodes] == [0, 1, 2, 3]
    assert len(sub.edges) == 3


def test_region_ct_free_is_empty():
    assert select_region(make_graph([(0, 1)]), "CT_secondary") == PropertyGraph()


def test_region_terminal_strip_and_circuit():
    kinds = {0: NodeKind.TERMINAL, 1: NodeKind.JUNCTION, 2: NodeKind.BREAKER, 3: NodeKind.TERMINAL}
    g = make_graph([(0, 1), (1, 2), (2, 3)], kinds=kinds, attributes={2: {"circuit": "7"}, 3: {"circuit": "7"}})
    assert [n.id for n in select_region(g, "terminal_strip").nodes] == [0, 1, 3]
    assert [n.id for n in select_region(g, "per_circuit:7").nodes] == [2, 3]
    with pytest.raises(UnknownRegion):
        select_region(g, "somewhere")


# -- client seam -------------------------------------------------------------


class FixedClient:
    def __init__(self, *responses):
        self.responses = list(responses)
        self.calls = 0

    def request(self, payload):
        self.calls += 1
        r = self.responses.pop(0)
        if isinstance(r, Exception):
            raise r
        return r


def test_no_client_equals_plan(rules):
    for r in rules:
        assert plan_with_client(r) == plan(r)
        assert repr(plan_with_client(r, None)) == repr(plan(r))


def test_client_answer_accepted():
    client = FixedClient({"region": "CT_secondary", "function": "check_grounding_uniqueness"})
    notes = []
    q = plan_with_client(Rule("R", "anything at all", "Grounding"), client, diagnostics=notes)
    assert q == StructuredQuery("CT_secondary", "check_grounding_uniqueness", {})
    assert notes == []


def test_client_unknown_function_falls_back():
    notes = []
    q = plan_with_client(GROUNDING_RULE, FixedClient({"region": "whole", "function": "check_magic"}), diagnostics=notes)
    assert q == plan(GROUNDING_RULE)
    assert any("check_magic" in n for n in notes) and notes[-1] == "fell back to template planner"


def test_client_retry_once_then_fallback():
    client = FixedClient(TransportError("down"), TransportError("still down"))
    notes = []
    assert plan_with_client(GROUNDING_RULE, client, diagnostics=notes) == plan(GROUNDING_RULE)
    assert client.calls == 2 and len(notes) == 3


def test_client_retry_succeeds():
    client = FixedClient(TransportError("blip"), {"region": "whole", "function": "check_open_circuit"})
    assert plan_with_client(GROUNDING_RULE, client).function == "check_open_circuit"


def test_client_bad_region_falls_back():
    q = plan_with_client(GROUNDING_RULE, FixedClient({"region": "moon", "function": "check_open_circuit"}))
    assert q == plan(GROUNDING_RULE)


class _Handler(BaseHTTPRequestHandler):
    seen: list = []

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        _Handler.seen.append((self.headers.get("Authorization"), body))
        out = json.dumps({"region": "CT_secondary", "function": "check_grounding_uniqueness"}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(out)))
        self.end_headers()
        self.wfile.write(out)

    def log_message(self, *args):
        pass


def test_http_client_round_trip():
    server = HTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        url = f"http://127.0.0.1:{server.server_address[1]}/plan"
        client = HTTPPlannerClient(url, api_key="k123", timeout=5)
        q = plan_with_client(GROUNDING_RULE, client)
    finally:
        server.shutdown()
    assert q.function == "check_grounding_uniqueness"
    auth, body = _Handler.seen[-1]
    assert auth == "Bearer k123"
    assert body["rule"] == GROUNDING_RULE.text and "check_open_circuit" in body["functions"]


def test_http_client_unreachable_falls_back():
    client = HTTPPlannerClient("http://127.0.0.1:9/none", timeout=0.5)
    notes = []
    assert plan_with_client(GROUNDING_RULE, client, diagnostics=notes) == plan(GROUNDING_RULE)
    assert len(notes) == 3


def test_client_from_env(monkeypatch):
    monkeypatch.delenv("PLANNER_ENDPOINT", raising=False)
    assert HTTPPlannerClient.from_env() is None
    monkeypatch.setenv("PLANNER_ENDPOINT", "http://x")
    monkeypatch.setenv("PLANNER_API_KEY", "s")
    c = HTTPPlannerClient.from_env()
    assert c.endpoint == "http://x" and c.api_key == "s"


def test_load_rules_rejects_duplicates(tmp_path):
    p = tmp_path / "r.json"
    p.write_text(json.dumps([{"id": "A", "text": "t", "category": "Wiring"}] * 2))
    with pytest.raises(ValueError):
        load_rules(p)
