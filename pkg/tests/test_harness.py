import json

import numpy as np
import pytest

from ctxbias import corpus as corpus_mod
from ctxbias.harness import cli, config, corpusgen, report, runner
from ctxbias.metrics import MetricsReport


def _small_config(**kw):
    base = dict(
        n_utterances=12,
        u_min=12,
        u_max=16,
        n_chars=30,
        span_rate=0.9,
        two_span_rate=0.1,
        list_lengths=(51,),
        methods=("joint_pp",),
        n_seeds=1,
        seed=0,
    )
    base.update(kw)
    return config.ExperimentConfig(**base)


# ---------------------------------------------------------------- config


def test_config_round_trip(tmp_path):
    cfg = _small_config(
        span_rate=0.85,
        list_lengths=(51, 101),
        methods=("baseline", "joint"),
        n_seeds=3,
        outdir=str(tmp_path / "deep" / "runs"),
        score_jitter_sigma=0.1,
    )
    path = tmp_path / "exp.ini"
    config.save_config(cfg, path)
    loaded = config.load_config(path, apply_env=False)
    assert loaded == cfg


def test_config_env_overrides(tmp_path, monkeypatch):
    path = tmp_path / "exp.ini"
    config.save_config(_small_config(), path)
    monkeypatch.setenv(config.ENV_SEED, "7")
    monkeypatch.setenv(config.ENV_OUTDIR, str(tmp_path / "elsewhere"))
    loaded = config.load_config(path)
    assert loaded.seed == 7
    assert loaded.outdir == str(tmp_path / "elsewhere")
    # and they are ignored when not applied
    assert config.load_config(path, apply_env=False).seed == 0


def test_config_validation():
    with pytest.raises(ValueError):
        _small_config(span_rate=1.5)
    with pytest.raises(ValueError):
        _small_config(methods=("nope",))
    with pytest.raises(ValueError):
        _small_config(u_min=5, u_max=5)
    with pytest.raises(ValueError):
        _small_config(list_lengths=(51, 51))
    with pytest.raises(ValueError):
        _small_config(list_lengths=(11,))
    with pytest.raises(ValueError):
        _small_config(n_seeds=0)
    with pytest.raises(ValueError):
        _small_config(methods=("joint", "joint"))


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "exp.ini"
    config.save_config(_small_config(), path)
    path.write_text(path.read_text() + "\n[corpus]\nmystery = 3\n")
    with pytest.raises(Exception):
        config.load_config(path, apply_env=False)


# ---------------------------------------------------------------- corpus


def test_generate_span_rate_zero():
    cfg = _small_config(span_rate=0.0, n_utterances=10)
    corp = corpusgen.generate_corpus(cfg)
    assert corp.span_total == 0
    assert all(not u.spans for u in corp.utterances)


def test_generate_nested_lists_and_shape():
    cfg = _small_config(list_lengths=(51, 101), n_utterances=8)
    corp = corpusgen.generate_corpus(cfg)
    small, big = corp.lists[51], corp.lists[101]
    assert small.size == 51 and big.size == 101
    assert small.phrases == big.phrases[:51]
    assert big.phrases == corp.pool.sublist(tuple(range(101))).phrases
    assert len({p.tokens for p in corp.pool.phrases}) == corp.pool.size


def test_generate_spans_scan_cleanly():
    cfg = _small_config(list_lengths=(51, 101), n_utterances=30, two_span_rate=0.3)
    corp = corpusgen.generate_corpus(cfg)
    for biasing_list in corp.lists.values():
        for utt in corp.utterances:
            found = corpus_mod.scan_occurrences(utt.tokens, biasing_list)
            want = tuple(sorted((s.start, s.phrase) for s in utt.spans))
            assert found == want
    assert any(len(u.spans) == 2 for u in corp.utterances)


def test_generate_records_seeded_span_count():
    cfg = _small_config(n_utterances=200, n_chars=40, list_lengths=(51, 201))
    corp = corpusgen.generate_corpus(cfg)
    # binomial(200, 0.9): mean 180, sd 4.24; the exact draw is pinned
    assert 160 <= corp.span_total <= 198
    assert corp.span_total == sum(1 for u in corp.utterances if u.spans)
    again = corpusgen.generate_corpus(cfg)
    assert again.span_total == corp.span_total


def test_generate_pool_contains_confusable_variants():
    cfg = _small_config(list_lengths=(51, 601), n_utterances=8, n_chars=60)
    corp = corpusgen.generate_corpus(cfg)
    vocab = corp.vocabulary
    golds = [p.tokens for p in corp.pool.phrases[:50]]
    gold_set = set(golds)
    swaps = 0
    for phrase in corp.pool.phrases[200:]:
        t = phrase.tokens
        if len(t) != corpusgen.GOLD_LEN:
            continue
        for g in golds:
            diff = [i for i in range(len(g)) if g[i] != t[i]]
            if len(diff) == 1 and t[diff[0]] == vocab.confusable[g[diff[0]]]:
                swaps += 1
                break
    assert swaps >= 40  # almost every gold contributes its single swaps
    assert not any(p.tokens in gold_set for p in corp.pool.phrases[50:])


def test_generate_is_deterministic():
    cfg = _small_config(n_utterances=10)
    a = corpusgen.generate_corpus(cfg)
    b = corpusgen.generate_corpus(cfg)
    assert [u.tokens for u in a.utterances] == [u.tokens for u in b.utterances]
    assert [p.tokens for p in a.pool.phrases] == [p.tokens for p in b.pool.phrases]
    c = corpusgen.generate_corpus(config.ExperimentConfig(**{**cfg.__dict__, "seed": 1}))
    assert [u.tokens for u in c.utterances] != [u.tokens for u in a.utterances]


# ---------------------------------------------------------------- runner


def test_sweep_zero_noise_is_exact():
    cfg = _small_config(
        methods=("baseline", "attn", "joint_pp", "joint_gcp_pp"), n_utterances=12
    )
    corp = corpusgen.generate_corpus(cfg)
    results = runner.run_sweep(cfg, corpus=corp)
    assert len(results) == len(cfg.methods) * len(cfg.list_lengths) * cfg.n_seeds
    for method in cfg.methods:
        cell = results[(method, 51, 0)]
        assert cell.report.cer == 0.0
        assert cell.report.f1 == 1.0
        assert cell.report.retention == 1.0
        assert cell.n_utterances == 12
        assert cell.report.rtf > 0.0
    purified = results[("joint_gcp_pp", 51, 0)]
    assert purified.m_pur_mean is not None and purified.m_pur_mean < 51
    assert results[("joint_pp", 51, 0)].m_pur_mean is None


def test_sweep_outcomes_are_per_utterance():
    cfg = _small_config(n_utterances=6)
    results = runner.run_sweep(cfg, keep_outcomes=True)
    cell = results[("joint_pp", 51, 0)]
    assert len(cell.outcomes) == 6
    assert [o.uid for o in cell.outcomes] == sorted(o.uid for o in cell.outcomes)
    for out in cell.outcomes:
        assert out.count_final >= out.count_bb


def test_sweep_workers_match_serial():
    cfg = _small_config(n_utterances=8, methods=("joint",), score_jitter_sigma=0.1)
    corp = corpusgen.generate_corpus(cfg)
    serial = runner.run_sweep(cfg, corpus=corp, workers=1)
    parallel = runner.run_sweep(cfg, corpus=corp, workers=2)
    for key in serial:
        a, b = serial[key].report.to_dict(), parallel[key].report.to_dict()
        a.pop("rtf"), b.pop("rtf")
        assert a == b


# ---------------------------------------------------------------- report


def _fake_cell(method, m, seed, cer_v, f1_v, rtf_v):
    rep = MetricsReport(
        cer=cer_v,
        precision=f1_v,
        recall=f1_v,
        f1=f1_v,
        retention=1.0,
        rtf=rtf_v,
        substitutions=1,
        insertions=0,
        deletions=0,
        ref_length=100,
        tp=9,
        fp=1,
        fn=1,
    )
    return runner.CellResult(
        method=method,
        list_length=m,
        seed=seed,
        report=rep,
        decode_seconds=rtf_v * 50.0,
        audio_seconds=50.0,
        n_utterances=4,
        m_pur_mean=None,
        outcomes=None,
    )


def test_table_golden_layout():
    results = {
        ("baseline", 51, 0): _fake_cell("baseline", 51, 0, 0.05, 0.9, 0.01),
        ("baseline", 201, 0): _fake_cell("baseline", 201, 0, 0.06, 0.85, 0.02),
        ("joint", 51, 0): _fake_cell("joint", 51, 0, 0.01, 0.995, 0.03),
        ("joint", 201, 0): _fake_cell("joint", 201, 0, 0.02, 0.97, 0.04),
    }
    records = [report.cell_record(r) for r in results.values()]
    table = report.format_table(records)
    assert table == (
        "method    M=51                       M=201\n"
        "--------  -------------------------  -------------------------\n"
        "baseline  5.00 // 90.00|90.00|90.00  6.00 // 85.00|85.00|85.00\n"
        "joint     1.00 // 99.50|99.50|99.50  2.00 // 97.00|97.00|97.00\n"
    )


def test_table_averages_over_seeds():
    results = {
        ("joint", 51, 0): _fake_cell("joint", 51, 0, 0.02, 0.9, 0.01),
        ("joint", 51, 1): _fake_cell("joint", 51, 1, 0.04, 1.0, 0.03),
    }
    records = [report.cell_record(r) for r in results.values()]
    table = report.format_table(records)
    assert "3.00 // 95.00|95.00|95.00" in table


def test_emit_report_files_and_masking(tmp_path):
    results = {
        ("joint", 51, 0): _fake_cell("joint", 51, 0, 0.02, 0.9, 0.01),
    }
    written = report.emit_report(results, tmp_path)
    names = {p.name for p in written}
    assert names == {"cell_joint_M51_s0.json", "report.txt", "rtf.csv"}
    rec = json.loads((tmp_path / "cell_joint_M51_s0.json").read_text())
    assert set(rec["timing"]) == {"decode_seconds", "audio_seconds", "rtf"}
    assert "rtf" not in rec["metrics"]

    slower = {("joint", 51, 0): _fake_cell("joint", 51, 0, 0.02, 0.9, 0.07)}
    report.emit_report(slower, tmp_path / "again")
    rec2 = json.loads((tmp_path / "again" / "cell_joint_M51_s0.json").read_text())
    assert rec != rec2
    rec.pop("timing"), rec2.pop("timing")
    assert rec == rec2

    csv_lines = (tmp_path / "rtf.csv").read_text().strip().splitlines()
    assert csv_lines[0] == "method,list_length,mean_rtf,total_decode_seconds,total_audio_seconds"
    assert csv_lines[1].startswith("joint,51,0.010000,")


def test_read_cells_round_trip(tmp_path):
    results = {
        ("joint", 51, 0): _fake_cell("joint", 51, 0, 0.02, 0.9, 0.01),
        ("attn", 51, 0): _fake_cell("attn", 51, 0, 0.08, 0.6, 0.01),
    }
    report.emit_report(results, tmp_path)
    records = report.read_cells(tmp_path)
    rebuilt = report.format_table(records)
    direct = report.format_table(
        [report.cell_record(r) for r in results.values()]
    )
    # files come back in name order, so compare rows irrespective of order
    assert sorted(rebuilt.splitlines()) == sorted(direct.splitlines())
    with pytest.raises(ValueError):
        report.read_cells(tmp_path / "empty")


# ------------------------------------------------------------------- cli


def test_cli_sweep_then_report(tmp_path, capsys):
    cfg = _small_config(n_utterances=6, outdir=str(tmp_path / "runs"))
    ini = tmp_path / "exp.ini"
    config.save_config(cfg, ini)
    assert cli.main(["sweep", "--config", str(ini)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["cells"] == 1
    assert (tmp_path / "runs" / "report.txt").exists()
    assert cli.main(["report", "--runs", str(tmp_path / "runs")]) == 0
    assert "M=51" in capsys.readouterr().out


def test_cli_gen_and_decode(tmp_path, capsys):
    cfg = _small_config(n_utterances=6, outdir=str(tmp_path / "runs"))
    ini = tmp_path / "exp.ini"
    config.save_config(cfg, ini)
    assert cli.main(["gen", "--config", str(ini)]) == 0
    gen_out = json.loads(capsys.readouterr().out)
    assert gen_out["n_utterances"] == 6
    assert (tmp_path / "runs" / "corpus" / "utterances.tsv").exists()
    assert (tmp_path / "runs" / "corpus" / "list_M51.txt").exists()

    dump = tmp_path / "dump.npz"
    code = cli.main(
        ["decode", "--config", str(ini), "--utt", "utt0003", "--out", str(dump)]
    )
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["uid"] == "utt0003"
    arrays = np.load(dump)
    assert {"q_list", "q_slist", "q_sphr", "q_bias", "q_casr",
            "p_bb", "hyp_bb", "hyp_final", "ref"} <= set(arrays.files)


def test_cli_reports_errors_as_json(tmp_path, capsys):
    assert cli.main(["sweep", "--config", str(tmp_path / "missing.ini")]) == 1
    err = json.loads(capsys.readouterr().err)
    assert set(err) == {"error", "message"}

    cfg = _small_config(n_utterances=4, outdir=str(tmp_path / "r"))
    ini = tmp_path / "exp.ini"
    config.save_config(cfg, ini)
    assert cli.main(["decode", "--config", str(ini), "--utt", "nope"]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ValueError"


def test_cli_seed_override(tmp_path, capsys):
    cfg = _small_config(n_utterances=4, outdir=str(tmp_path / "a"))
    ini = tmp_path / "exp.ini"
    config.save_config(cfg, ini)
    assert cli.main(["gen", "--config", str(ini), "--seed", "3",
                     "--outdir", str(tmp_path / "b")]) == 0
    json.loads(capsys.readouterr().out)
    assert (tmp_path / "b" / "corpus" / "utterances.tsv").exists()
    saved = config.load_config(tmp_path / "b" / "corpus" / "config.ini",
                               apply_env=False)
    assert saved.seed == 3
