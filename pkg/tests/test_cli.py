import json
import subprocess
import sys

import pytest

from semsearch.cli import MACHINE_SCHEMA, main

from conftest import CORPUS, DATA

CALLS_Q = ":- pred P(L, Size) : (var(L), var(Size))."


@pytest.fixture(scope="module")
def cache(tmp_path_factory):
    c = tmp_path_factory.mktemp("clicache")
    assert main(["--cache", str(c), "index", str(CORPUS)]) == 0
    return c


def run(cache, *args):
    return main(["--cache", str(cache), *args])


def test_index_prints_timing_and_sizes(tmp_path, capsys):
    assert main(["--cache", str(tmp_path), "index", str(CORPUS), "--domains", "shfr"]) == 0
    out = capsys.readouterr().out
    assert "fig1" in out and "shfr" in out and "B" in out
    assert "indexed 5 module(s), 0 failure(s)" in out


def test_index_partial_failure_exit_4(tmp_path, capsys):
    assert main(["--cache", str(tmp_path), "index", str(CORPUS), str(DATA)]) == 4
    assert "broken.pl" in capsys.readouterr().err


def test_index_missing_path_exit_2(tmp_path):
    assert main(["--cache", str(tmp_path), "index", str(tmp_path / "none")]) == 2


def test_index_bad_domain_exit_2(tmp_path):
    assert main(["--cache", str(tmp_path), "index", str(CORPUS), "--domains", "shfr,nope"]) == 2


def test_find_human(cache, capsys):
    assert run(cache, "find", CALLS_Q) == 0
    out = capsys.readouterr().out
    assert "fig1:gen_list/2  checked" in out
    assert "[shfr: checked] [shapes: check] => checked" in out


def test_find_machine_has_schema_and_sorted_keys(cache, capsys):
    assert run(cache, "find", CALLS_Q, "--format", "machine") == 0
    lines = capsys.readouterr().out.splitlines()
    header = json.loads(lines[0])
    assert header["schema"] == MACHINE_SCHEMA
    for line in lines[1:]:
        rec = json.loads(line)
        assert list(rec) == sorted(rec)
        assert {"module", "predicate", "arity", "status", "residue"} <= set(rec)


def test_find_query_from_file(cache, tmp_path, capsys):
    q = tmp_path / "q.pl"
    q.write_text(CALLS_Q + "\n")
    assert run(cache, "find", str(q), "--status", "checked") == 0
    assert "gen_list" in capsys.readouterr().out


def test_find_no_results_exit_1(cache):
    assert run(cache, "find", CALLS_Q, "--keyword", "zzzz") == 1


def test_find_keywords_are_anded(cache, capsys):
    assert run(cache, "find", CALLS_Q, "--keyword", "list", "--keyword", "random") == 0
    out = capsys.readouterr().out
    assert "gen_list" in out and "get_length" not in out


def test_find_parse_error_exit_2(cache, capsys):
    assert run(cache, "find", ":- pred P(L Size).") == 2
    assert "query error" in capsys.readouterr().err


def test_find_missing_cache_exit_3(tmp_path):
    assert main(["--cache", str(tmp_path / "empty"), "find", CALLS_Q]) == 3


def test_cache_from_environment(cache, monkeypatch, capsys):
    monkeypatch.setenv("SEMSEARCH_CACHE", str(cache))
    assert main(["find", CALLS_Q, "--status", "false"]) == 0
    assert "check_length" in capsys.readouterr().out


def test_show_prints_true_pred_lines(cache, capsys):
    assert run(cache, "show", "simple", "--domain", "shapes") == 0
    out = capsys.readouterr().out.splitlines()
    assert ":- true pred perfect(A) : term(A) => b(A)." in out
    assert ":- regtype t1/1." in out


def test_show_missing_module_exit_3(cache):
    assert run(cache, "show", "nope") == 3


def test_console_entry_point(cache):
    p = subprocess.run([sys.executable, "-m", "semsearch", "--cache", str(cache), "show", "fig1"],
                       capture_output=True, text=True)
    assert p.returncode == 0
    assert p.stdout.startswith(":- true pred my_length(A,B)")
