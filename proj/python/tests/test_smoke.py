import json

import pytest

import fgbp


@pytest.fixture(scope="module")
def tree():
    graph, labels = fgbp.gen_tree_instance(3, 6, seed=11)
    return graph, labels


def test_tree_sum_product_matches_exact(tree):
    graph, _ = tree
    result = fgbp.run_bp(graph, mode="sum")
    assert result["converged"]
    exact = fgbp.exact_marginals(graph)
    for bp_row, exact_row in zip(result["beliefs"], exact):
        for a, b in zip(bp_row, exact_row):
            assert abs(a - b) < 1e-8


def test_tree_max_sum_decodes_map(tree):
    graph, labels = tree
    result = fgbp.run_bp(graph, mode="max")
    assert result["map"] == labels
    assert fgbp.exact_map(graph)["assignment"] == labels


def test_synthetic_chain_shape():
    graph, labels = fgbp.gen_synthetic_instance("D1", seed=7)
    assert graph.num_variables == 14
    assert graph.num_factors == 34
    assert len(labels) == 14
    assert set(labels) <= {0, 1}


def test_graph_json_round_trip():
    graph, _ = fgbp.gen_synthetic_instance("D2", seed=3)
    text = graph.to_json()
    json.loads(text)
    back = fgbp.graph_from_json(text)
    assert back.to_json() == text


def test_certifiers_pass():
    reports = fgbp.run_construction_certifiers(seed=2026)
    assert len(reports) == 4
    assert all(r["pass"] for r in reports)


def test_ldpc_sweep_csv():
    csv = fgbp.ldpc_ber_sweep(["sum", "bit"], [4], [0.0], trials=2, seed=1)
    lines = csv.strip().split("\n")
    assert lines[0] == "snr_db,sigma_b,decoder,trials,bit_errors,ber"
    assert len(lines) == 3


def test_bad_mode_raises():
    graph, _ = fgbp.gen_tree_instance(3, 3, seed=0)
    with pytest.raises(ValueError):
        fgbp.run_bp(graph, mode="bogus")
