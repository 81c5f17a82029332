import json
from pathlib import Path

import numpy as np
import pytest

from levnet.cli import (
    EXIT_COMPUTE,
    EXIT_IO,
    EXIT_OK,
    EXIT_VALIDATION,
    IngestError,
    IngestSpec,
    format_sim_config,
    ingest_panel,
    main,
    read_sim_config,
    write_panel_csv,
)
from levnet.sim import ConfigError, SimConfig

WELL_FORMED = """bank_id,date,assets,liabilities
alpha,2005-03-31,120.0,100.0
alpha,2005-06-30,125.0,100.0
alpha,2005-09-30,150.0,100.0
beta,2005-03-31,90.0,30.0
beta,2005-06-30,95.0,31.0
beta,2005-09-30,99.0,32.0
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestIngest:
    def test_well_formed_two_banks(self, tmp_path):
        result = ingest_panel(IngestSpec(str(write(tmp_path, "p.csv", WELL_FORMED))))
        assert len(result.panel.grid) == 3
        assert result.complete.bank_ids == ("alpha", "beta")
        assert result.census.n_complete == 2
        assert not result.report["mixed_sampling"]

    def test_missing_tail_date_is_a_death_not_a_gap(self, tmp_path):
        text = WELL_FORMED.replace("beta,2005-09-30,99.0,32.0\n", "")
        result = ingest_panel(IngestSpec(str(write(tmp_path, "p.csv", text))))
        assert result.complete.bank_ids == ("alpha",)
        assert result.census.n_death == 1
        assert result.report["gapped_banks"] == []
        # a death is fine even in strict mode
        strict = ingest_panel(IngestSpec(str(tmp_path / "p.csv"), mode="strict"))
        assert strict.complete.bank_ids == ("alpha",)

    def test_interior_gap_lenient_flags_strict_refuses(self, tmp_path):
        text = WELL_FORMED.replace("beta,2005-06-30,95.0,31.0\n", "")
        path = write(tmp_path, "p.csv", text)
        result = ingest_panel(IngestSpec(str(path)))
        assert result.report["gapped_banks"] == ["beta"]
        assert result.report["mixed_sampling"]
        assert result.complete.bank_ids == ("alpha",)
        assert result.census.n_start == 2  # gapped banks still counted
        with pytest.raises(IngestError):
            ingest_panel(IngestSpec(str(path), mode="strict"))

    def test_insolvent_bank_dropped_or_fatal(self, tmp_path):
        text = WELL_FORMED.replace("beta,2005-06-30,95.0,31.0", "beta,2005-06-30,95.0,95.0")
        path = write(tmp_path, "p.csv", text)
        result = ingest_panel(IngestSpec(str(path)))
        assert result.panel.bank_ids == ("alpha",)
        assert result.report["dropped"][0]["bank_id"] == "beta"
        with pytest.raises(IngestError):
            ingest_panel(IngestSpec(str(path), mode="strict"))

    def test_malformed_row_reports_line_number(self, tmp_path):
        text = WELL_FORMED + "gamma,not-a-date,1.0,0.5\n"
        with pytest.raises(IngestError, match=":8:"):
            ingest_panel(IngestSpec(str(write(tmp_path, "p.csv", text))))

    def test_duplicate_dates_dropped(self, tmp_path):
        text = WELL_FORMED + "alpha,2005-03-31,120.0,100.0\n"
        result = ingest_panel(IngestSpec(str(write(tmp_path, "p.csv", text))))
        assert result.panel.bank_ids == ("beta",)
        assert result.report["dropped"][0]["reason"] == "duplicate dates"

    def test_column_mapping(self, tmp_path):
        text = WELL_FORMED.replace("bank_id,date,assets,liabilities", "bk,when,tot_a,tot_l")
        path = write(tmp_path, "p.csv", text)
        result = ingest_panel(IngestSpec(str(path), bank_col="bk", date_col="when",
                                         assets_col="tot_a", liabilities_col="tot_l"))
        assert result.census.n_complete == 2

    def test_spec_validation(self):
        with pytest.raises(IngestError):
            IngestSpec("x.csv", bank_col="date")
        with pytest.raises(IngestError):
            IngestSpec("x.csv", mode="loose")


class TestIngestCommand:
    def test_argentina_census_values(self, tmp_path, argentina_panel):
        src = tmp_path / "argentina.csv"
        write_panel_csv(argentina_panel, src)
        out = tmp_path / "out"
        assert main(["ingest", "--input", str(src), "--out-dir", str(out)]) == EXIT_OK
        census = json.loads((out / "census.json").read_text())["census"]
        assert census == {"n_start": 81, "n_end": 78, "n_birth": 3,
                          "n_death": 6, "n_complete": 75}
        panel_rows = (out / "panel.csv").read_text().splitlines()
        assert len(panel_rows) == 1 + 75 * 24

    def test_missing_file_is_io_error(self, tmp_path):
        rc = main(["ingest", "--input", str(tmp_path / "nope.csv"), "--out-dir", str(tmp_path)])
        assert rc == EXIT_IO

    def test_invalid_file_is_validation_error(self, tmp_path):
        bad = write(tmp_path, "bad.csv", "bank_id,date,assets,liabilities\nx,2020-01-01,0,0\n")
        rc = main(["ingest", "--input", str(bad), "--out-dir", str(tmp_path / "o")])
        assert rc == EXIT_VALIDATION


class TestNetworkCommand:
    def test_identical_panel_complete_graph(self, tmp_path):
        rows = ["bank_id,date,assets,liabilities"]
        for b in ("a", "b", "c"):
            for t, (a_, l_) in enumerate([(120.0, 100.0), (125.0, 100.0), (150.0, 100.0),
                                          (130.0, 100.0)]):
                rows.append(f"{b},200{t}-01-01,{a_},{l_}")
        src = write(tmp_path, "p.csv", "\n".join(rows) + "\n")
        out = tmp_path / "net"
        assert main(["network", "--input", str(src), "--rho", "0.9",
                     "--out-dir", str(out)]) == EXIT_OK
        summary = json.loads((out / "summary.json").read_text())
        assert summary["largest_fraction"] == 1.0
        assert summary["n_edges"] == 3
        edges = (out / "edges.csv").read_text().splitlines()
        assert edges[0] == "bank_a,bank_b,r"
        assert len(edges) == 4

    def test_modular_panel_isolated_count(self, tmp_path, modular_panel):
        src = tmp_path / "modular.csv"
        write_panel_csv(modular_panel, src)
        out = tmp_path / "net"
        assert main(["network", "--input", str(src), "--rho", "0.8",
                     "--out-dir", str(out)]) == EXIT_OK
        summary = json.loads((out / "summary.json").read_text())
        assert summary["n"] == 75
        assert summary["n_isolated"] == 41

    def test_average_degree_target(self, tmp_path, modular_panel):
        src = tmp_path / "modular.csv"
        write_panel_csv(modular_panel, src)
        out = tmp_path / "net"
        assert main(["network", "--input", str(src), "--avg-degree", "2.5",
                     "--out-dir", str(out)]) == EXIT_OK
        summary = json.loads((out / "summary.json").read_text())
        assert summary["target_edges"] == 94
        assert summary["n_edges"] == 94

    def test_absolute_mode_with_avg_degree_rejected(self, tmp_path, modular_panel):
        src = tmp_path / "modular.csv"
        write_panel_csv(modular_panel, src)
        rc = main(["network", "--input", str(src), "--avg-degree", "2.5",
                   "--mode", "absolute", "--out-dir", str(tmp_path / "x")])
        assert rc == EXIT_COMPUTE

    def test_components_file_partitions_nodes(self, tmp_path, modular_panel):
        src = tmp_path / "modular.csv"
        write_panel_csv(modular_panel, src)
        out = tmp_path / "net"
        main(["network", "--input", str(src), "--rho", "0.5", "--out-dir", str(out)])
        lines = (out / "components.csv").read_text().splitlines()[1:]
        assert len(lines) == 75
        sizes = {}
        for line in lines:
            _, comp, size = line.split(",")
            sizes.setdefault(comp, set()).add(size)
        assert all(len(s) == 1 for s in sizes.values())


class TestCurveCommand:
    def test_trivial_identical_pair(self, tmp_path):
        rows = ["bank_id,date,assets,liabilities"]
        for b in ("a", "b"):
            for t, l_ in enumerate([100.0, 110.0, 95.0]):
                rows.append(f"{b},201{t}-06-30,{l_ + 50.0},{l_}")
        src = write(tmp_path, "p.csv", "\n".join(rows) + "\n")
        out = tmp_path / "curve.csv"
        assert main(["curve", "--input", str(src), "--rho-min", "0", "--rho-max", "1",
                     "--rho-step", "0.25", "--out", str(out)]) == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "rho,largest_fraction"
        fractions = [float(line.split(",")[1]) for line in lines[1:]]
        assert fractions == [1.0] * 5

    def test_monotone_rows(self, tmp_path, modular_panel):
        src = tmp_path / "modular.csv"
        write_panel_csv(modular_panel, src)
        out = tmp_path / "curve.csv"
        assert main(["curve", "--input", str(src), "--rho-step", "0.05",
                     "--out", str(out)]) == EXIT_OK
        fractions = [float(line.split(",")[1])
                     for line in out.read_text().splitlines()[1:]]
        assert all(b <= a + 1e-15 for a, b in zip(fractions, fractions[1:]))

    def test_bad_grid_rejected(self, tmp_path, modular_panel):
        src = tmp_path / "modular.csv"
        write_panel_csv(modular_panel, src)
        rc = main(["curve", "--input", str(src), "--rho-min", "0.9", "--rho-max", "0.2",
                   "--out", str(tmp_path / "c.csv")])
        assert rc == EXIT_COMPUTE


SIM_ARGS = ["--n-banks", "10", "--n-periods", "40", "--seed", "5"]


class TestSimulateCommand:
    def test_zero_periods_single_grid_point(self, tmp_path):
        out = tmp_path / "sim"
        assert main(["simulate", "--out-dir", str(out), "--n-banks", "6",
                     "--n-periods", "0", "--seed", "1"]) == EXIT_OK
        rows = (out / "panel.csv").read_text().splitlines()
        assert len(rows) == 1 + 6

    def test_round_trip_bitwise(self, tmp_path):
        sim_dir = tmp_path / "sim"
        main(["simulate", "--out-dir", str(sim_dir)] + SIM_ARGS)
        ingest_dir = tmp_path / "back"
        assert main(["ingest", "--input", str(sim_dir / "panel.csv"),
                     "--out-dir", str(ingest_dir), "--mode", "strict"]) == EXIT_OK
        assert (sim_dir / "panel.csv").read_bytes() == (ingest_dir / "panel.csv").read_bytes()

    def test_deterministic_outputs(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        main(["simulate", "--out-dir", str(a)] + SIM_ARGS)
        main(["simulate", "--out-dir", str(b)] + SIM_ARGS)
        for name in ("panel.csv", "adjacency.csv", "events.csv", "summary.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_seed_required(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--out-dir", str(tmp_path), "--n-banks", "6"])
        assert exc.value.code == EXIT_VALIDATION
        capsys.readouterr()

    def test_summary_and_adjacency_format(self, tmp_path):
        out = tmp_path / "sim"
        main(["simulate", "--out-dir", str(out)] + SIM_ARGS)
        summary = json.loads((out / "summary.json").read_text())
        assert summary["seed"] == 5 and summary["n_banks"] == 10
        assert summary["mean_leverage_final"] > 0
        adj = (out / "adjacency.csv").read_text().splitlines()
        assert adj[0] == "period,lender_id,borrower_id,amount"
        assert summary["n_interbank_links"] == len(adj) - 1

    def test_bad_config_value_is_validation_error(self, tmp_path):
        rc = main(["simulate", "--out-dir", str(tmp_path / "x"), "--seed", "1",
                   "--n-banks", "1"])
        assert rc == EXIT_VALIDATION


class TestStudyCommand:
    def test_single_run_rows(self, tmp_path):
        out = tmp_path / "study.csv"
        assert main(["study", "--runs", "1", "--out", str(out), "--n-banks", "8",
                     "--n-periods", "60", "--seed", "3"]) == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0].startswith("run,bank_id,role,")
        assert len(lines) == 1 + 8
        roles = [line.split(",")[2] for line in lines[1:]]
        assert roles.count("pair1") == 1 and roles.count("pair2") == 1
        assert roles.count("population") == 6

    def test_deterministic_files(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["--runs", "2", "--n-banks", "8", "--n-periods", "60", "--seed", "9"]
        main(["study", "--out", str(a)] + args)
        main(["study", "--out", str(b)] + args)
        assert a.read_bytes() == b.read_bytes()


class TestConfigFile:
    def test_default_file_matches_dataclass_defaults(self):
        path = Path(__file__).resolve().parent.parent / "configs" / "default.cfg"
        assert read_sim_config(path) == SimConfig()

    def test_round_trip_through_format(self, tmp_path):
        cfg = SimConfig(n_banks=33, arrival_rate=0.7, assets_range=(10.0, 20.0), seed=4)
        path = write(tmp_path, "c.cfg", format_sim_config(cfg))
        assert read_sim_config(path) == cfg

    def test_flags_override_file(self, tmp_path):
        path = write(tmp_path, "c.cfg", "n_banks = 20\nn_periods = 50\n")
        out = tmp_path / "sim"
        main(["simulate", "--config", str(path), "--n-periods", "10",
              "--seed", "2", "--out-dir", str(out)])
        summary = json.loads((out / "summary.json").read_text())
        assert summary["n_banks"] == 20
        assert summary["n_periods"] == 10

    def test_unknown_key_rejected(self, tmp_path):
        path = write(tmp_path, "c.cfg", "bank_count = 5\n")
        with pytest.raises(ConfigError):
            read_sim_config(path)

    def test_comments_and_tuples(self, tmp_path):
        path = write(tmp_path, "c.cfg",
                     "# comment\nassets_range = 100, 200  # inline\nseed = 11\n")
        cfg = read_sim_config(path)
        assert cfg.assets_range == (100.0, 200.0)
        assert cfg.seed == 11


def test_panel_csv_uses_roundtrip_float_format(tmp_path, argentina_panel):
    path = tmp_path / "p.csv"
    write_panel_csv(argentina_panel, path)
    again = ingest_panel(IngestSpec(str(path)))
    back = tmp_path / "q.csv"
    write_panel_csv(again.panel, back)
    assert path.read_bytes() == back.read_bytes()
