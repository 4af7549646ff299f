import pytest

from blogfluence.cli import main

SYNTH_KEYS = """
# small but complete pipeline configuration
window_hours = 12
tau_hours = 2
vocab_max_size = 160
n_topics = 2
rank_influenced = 2
rank_influencer = 3
top_n = 5
plsa_max_iter = 60
iolap_max_iter = 60
pcldc_max_iter = 20
pcl_max_iter = 60
synth.n_bloggers = 60
synth.n_days = 10
synth.vocab_size = 160
synth.n_topics = 2
synth.posts_per_blogger_rate = 1.0
synth.reads_per_post_rate = 5.0
synth.copy_prob = 0.6
synth.copy_fraction = 0.45
"""

STAGES = [
    "synth", "ingest", "links", "causality", "influence",
    "topics", "split", "tensor", "iolap", "pcldc", "pcl",
    "idr", "eval", "report",
]


@pytest.fixture(scope="module")
def config_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "pipeline.cfg"
    path.write_text(SYNTH_KEYS)
    return str(path)


def _run_all(out_dir, config_file, seed="5"):
    codes = {}
    for stage in STAGES:
        codes[stage] = main(
            [stage, "--config", config_file, "--out-dir", str(out_dir), "--seed", seed]
        )
    return codes


@pytest.fixture(scope="module")
def pipeline_dir(tmp_path_factory, config_file):
    out = tmp_path_factory.mktemp("run")
    codes = _run_all(out, config_file)
    assert all(code == 0 for code in codes.values()), codes
    return out


class TestPipeline:
    def test_artifacts_exist_and_non_empty(self, pipeline_dir):
        for name in ("posts.tsv", "access.log", "links.tsv", "influence.tsv",
                     "plsa_model.tsv", "iolap_model.tsv", "pcldc_model.tsv",
                     "pcl_model.tsv", "idr.tsv", "recall.tsv", "train.tsv", "test.tsv"):
            path = pipeline_dir / name
            assert path.exists(), name
            body = [l for l in path.read_text().splitlines() if l and not l.startswith("#")]
            assert body, name

    def test_headers_record_version_and_seed(self, pipeline_dir):
        for name in ("links.tsv", "influence.tsv", "idr.tsv", "recall.tsv"):
            first = (pipeline_dir / name).read_text().splitlines()[0]
            assert first.startswith("# blogfluence 0.1.0 subcommand=")
            assert "seed=5" in first and "config=" in first

    def test_report_bundles_files(self, pipeline_dir):
        report = pipeline_dir / "report"
        for name in ("hist_posts_hour.tsv", "hist_access_weekday.tsv",
                     "gap_hist.tsv", "zreport_forward.tsv", "idr.tsv",
                     "recall.tsv", "rankshift_themes.tsv"):
            assert (report / name).exists(), name

    def test_recommend_subcommand(self, pipeline_dir, config_file, capsys):
        test_lines = [
            l for l in (pipeline_dir / "test.tsv").read_text().splitlines()
            if l and not l.startswith("#") and not l.startswith("src\t")
        ]
        member, _, keywords = test_lines[0].split("\t")
        code = main([
            "recommend", "--config", config_file, "--out-dir", str(pipeline_dir),
            "--seed", "5", "--method", "iolap", "--member", member,
            "--keywords", keywords,
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "recommend: iolap top-5" in out


class TestExitCodes:
    def test_missing_dependency_is_2(self, tmp_path, config_file):
        assert main(["causality", "--config", config_file, "--out-dir", str(tmp_path)]) == 2

    def test_unknown_config_key_is_1(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("no_such_key = 3\n")
        assert main(["synth", "--config", str(bad), "--out-dir", str(tmp_path)]) == 1

    def test_invalid_value_is_1(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("tau_hours = 20\nwindow_hours = 12\n")
        assert main(["synth", "--config", str(bad), "--out-dir", str(tmp_path)]) == 1

    def test_missing_config_file_is_1(self, tmp_path):
        assert main(["synth", "--config", str(tmp_path / "nope.cfg"),
                     "--out-dir", str(tmp_path)]) == 1

    def test_unanswerable_recommend_is_1(self, pipeline_dir, config_file):
        code = main([
            "recommend", "--config", config_file, "--out-dir", str(pipeline_dir),
            "--seed", "5", "--method", "tg", "--keywords", "zzzznotaword",
        ])
        assert code == 1


def test_full_pipeline_deterministic(tmp_path_factory, config_file):
    out_a = tmp_path_factory.mktemp("det_a")
    out_b = tmp_path_factory.mktemp("det_b")
    assert all(c == 0 for c in _run_all(out_a, config_file, seed="9").values())
    assert all(c == 0 for c in _run_all(out_b, config_file, seed="9").values())
    names = sorted(p.name for p in out_a.iterdir() if p.is_file())
    assert names == sorted(p.name for p in out_b.iterdir() if p.is_file())
    for name in names:
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name
    report_names = sorted(p.name for p in (out_a / "report").iterdir())
    for name in report_names:
        assert (out_a / "report" / name).read_bytes() == (out_b / "report" / name).read_bytes()


def test_flag_overrides_config(tmp_path, config_file, capsys):
    code = main(["synth", "--config", config_file, "--out-dir", str(tmp_path), "--seed", "3"])
    assert code == 0
    header = (tmp_path / "posts.tsv").read_text().splitlines()[0]
    assert "seed=3" in header
