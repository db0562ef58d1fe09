import csv
import io

import pytest

from spikefloat.cli import EXIT_MISMATCH, EXIT_OK, EXIT_USAGE, RunConfig, main, parse_counts, parse_neurons


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestMul:
    def test_identity_hex(self, capsys):
        code, out, _ = run(capsys, "mul", "0x3F800000", "0x3F800000", "--mode", "rate", "--width", "8")
        assert code == EXIT_OK
        assert "result   0x3F800000" in out
        assert out.strip().endswith("MATCH")

    def test_decimal(self, capsys):
        code, out, _ = run(capsys, "mul", "2.5", "3.5", "--mode", "rate", "--width", "6")
        assert code == EXIT_OK
        assert "0x410C0000" in out and "8.75" in out
        assert "MISMATCH" not in out

    @pytest.mark.parametrize(
        "operand,kind", [("0x00000000", "zero"), ("0x00000001", "subnormal"), ("inf", "infinity"), ("nan", "NaN")]
    )
    def test_special_inputs(self, capsys, operand, kind):
        code, _, err = run(capsys, "mul", operand, "0x3F800000", "--width", "4")
        assert code == EXIT_USAGE
        assert f"{kind} input unsupported" in err

    def test_parse_error(self, capsys):
        code, _, err = run(capsys, "mul", "banana", "1.0", "--width", "4")
        assert code == EXIT_USAGE and "cannot parse" in err

    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["mul", "1.0"])
        assert exc.value.code == EXIT_USAGE
        with pytest.raises(SystemExit) as exc:
            main(["mul", "1.0", "2.0", "--mode", "analog"])
        assert exc.value.code == EXIT_USAGE

    def test_spiking_prints_component_metrics(self, capsys):
        code, out, _ = run(capsys, "mul", "1.5", "2", "--mode", "spiking", "--width", "3", "--neurons", "200")
        assert code == EXIT_OK
        assert "mantissa_multiplier  n=200" in out


class TestVerify:
    def test_exhaustive_rate(self, capsys):
        code, out, _ = run(capsys, "verify", "--width", "3", "--mode", "rate", "--exhaustive")
        assert code == EXIT_OK
        assert "cases=256 mismatches=0 bit_errors=0" in out

    def test_exhaustive_needs_small_width(self, capsys):
        code, _, err = run(capsys, "verify", "--width", "6", "--exhaustive")
        assert code == EXIT_USAGE

    def test_mismatch_exit_code(self, capsys):
        # ten neurons per ensemble cannot hold a truth table
        code, out, _ = run(capsys, "verify", "--width", "3", "--mode", "rate", "--trials", "20", "--neurons", "10")
        assert code == EXIT_MISMATCH
        assert "MISMATCH 0x" in out

    def test_deterministic(self, capsys):
        args = ("verify", "--width", "2", "--mode", "spiking", "--trials", "2", "--neurons", "150", "--seed", "4")
        first = run(capsys, *args)
        assert first == run(capsys, *args)

    @pytest.mark.slow
    def test_spiking_campaign_at_300(self, capsys):
        code, out, _ = run(capsys, "verify", "--width", "6", "--mode", "spiking", "--trials", "50", "--neurons", "300")
        assert code == EXIT_OK, out
        assert "bit_errors=0" in out


class TestSweep:
    def test_single_count(self, capsys, tmp_path):
        path = tmp_path / "s.csv"
        code, out, _ = run(
            capsys, "sweep", "--component", "exponent_adder", "--counts", "100,150", "--trials", "2",
            "--inputs-per-trial", "2", "--out", str(path),
        )
        assert code == EXIT_OK
        rows = list(csv.DictReader(open(path)))
        assert len(rows) == 4
        assert all(r["bit_errors"] == "0" for r in rows)
        assert "knee at" in out

    def test_unknown_component(self, capsys):
        code, _, err = run(capsys, "sweep", "--component", "divider")
        assert code == EXIT_USAGE and "unknown component" in err

    def test_long_run_guard(self, capsys):
        code, _, err = run(capsys, "sweep", "--component", "sign_of_uf", "--width", "23")
        assert code == EXIT_USAGE and "--long-run" in err


class TestConfig:
    def test_round_trip(self):
        cfg = RunConfig(mode="spiking", width=6, neurons={"mantissa_multiplier": 150}, seed=3, dt_ms=0.5, out="x.csv")
        assert RunConfig.from_text(cfg.to_text()) == cfg
        assert RunConfig.from_text(RunConfig().to_text()) == RunConfig()

    def test_file_with_flag_override(self, capsys, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("# experiment\nmode = rate\nwidth = 2\nneurons = sign_of_uf=100\n")
        code, out, _ = run(capsys, "mul", "1.5", "1.5", "--config", str(p), "--width", "3")
        assert code == EXIT_OK
        assert "(0, 10000000, 001)" in out

    def test_bad_key(self, capsys, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("colour = blue\n")
        code, _, err = run(capsys, "mul", "1.5", "1.5", "--config", str(p))
        assert code == EXIT_USAGE and "unknown config key" in err

    def test_parsers(self):
        assert parse_counts("100:300:100") == [100, 200, 300]
        assert parse_counts("100,150") == [100, 150]
        assert parse_neurons("300")["sign_of_uf"] == 300
        assert parse_neurons("sign_of_uf=50") == {"sign_of_uf": 50}
