import math

from relucalc.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_build_square_metrics(capsys, tmp_path):
    out = tmp_path / "sq.relunet"
    code, stdout, _ = run_cli(
        capsys, "build", "square", "--eps", "1e-3", "--out", str(out)
    )
    assert code == 0
    header, row = stdout.strip().splitlines()
    assert header.startswith("constructor,")
    fields = row.split(",")
    assert fields[0] == "square"
    assert int(fields[3]) == 3  # width
    assert out.exists()


def test_build_sawtooth_depth(capsys):
    code, stdout, _ = run_cli(capsys, "build", "sawtooth", "--s", "4")
    assert code == 0
    row = stdout.strip().splitlines()[1]
    assert int(row.split(",")[2]) == 5  # depth s+1


def test_build_unknown_constructor(capsys):
    code, _, stderr = run_cli(capsys, "build", "nosuch")
    assert code == 2
    assert "unknown constructor" in stderr


def test_sweep_square(capsys, tmp_path):
    out = tmp_path / "sweep.csv"
    code, stdout, _ = run_cli(
        capsys,
        "sweep",
        "square",
        "--eps-list",
        "0.25,0.0625,0.001",
        "--grid",
        "10001",
        "--out",
        str(out),
    )
    assert code == 0
    lines = stdout.strip().splitlines()
    assert lines[0].startswith("eps,")
    assert len(lines) == 4
    for line in lines[1:]:
        eps, err = (float(v) for v in line.split(",")[:2])
        assert err <= eps + 1e-12
    # depth column affine in log2(1/eps) with slope 1/2 up to rounding
    depths = [int(line.split(",")[3]) for line in lines[1:]]
    for line, depth in zip(lines[1:], depths):
        eps = float(line.split(",")[0])
        assert depth == max(1, math.ceil(math.log2(1 / eps) / 2) - 1) + 1


def test_sweep_deterministic(capsys, tmp_path):
    args = ["sweep", "square", "--eps-list", "0.01,0.001", "--grid", "5001"]
    code1, out1, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2


def test_sweep_empty_list(capsys):
    code, _, stderr = run_cli(capsys, "sweep", "square", "--eps-list", "")
    assert code == 2


def test_codec_round_trip(capsys, tmp_path):
    net_path = tmp_path / "net.relunet"
    run_cli(capsys, "build", "square", "--eps", "1e-2", "--out", str(net_path))
    code, stdout, _ = run_cli(
        capsys,
        "codec",
        str(net_path),
        "--k",
        "4",
        "--D",
        "1.0",
        "--eps",
        "0.25",
        "--grid",
        "2001",
    )
    assert code == 0
    header, row = stdout.strip().splitlines()
    fields = dict(zip(header.split(","), row.split(",")))
    assert fields["round_trip_ok"] == "1"
    assert int(fields["bits"]) <= int(fields["bound"])
    assert float(fields["deviation"]) <= 0.25


def test_codec_corrupted_file(capsys, tmp_path):
    bad = tmp_path / "bad.relunet"
    bad.write_text("relunet v1\n2\n1 3 1\n0x1p+0\n")
    code, _, stderr = run_cli(capsys, "codec", str(bad), "--eps", "0.25")
    assert code == 3


def test_regions_sawtooth(capsys, tmp_path):
    net_path = tmp_path / "saw.relunet"
    run_cli(capsys, "build", "sawtooth", "--s", "5", "--out", str(net_path))
    code, stdout, _ = run_cli(capsys, "regions", str(net_path), "0.0", "1.0")
    assert code == 0
    row = stdout.strip().splitlines()[1]
    count, bound = (int(v) for v in row.split(","))
    assert count == 32
    assert bound >= count


def test_minpieces_square(capsys):
    code, stdout, _ = run_cli(
        capsys,
        "minpieces",
        "square",
        "0.0",
        "1.0",
        "--eps-list",
        "1e-4",
        "--grid",
        "40001",
    )
    assert code == 0
    row = stdout.strip().splitlines()[1]
    fields = row.split(",")
    assert abs(int(fields[1]) - 36) <= 2
    assert abs(float(fields[3]) - math.sqrt(2) / 4) <= 1e-9


def test_minpieces_unknown_function(capsys):
    code, _, stderr = run_cli(capsys, "minpieces", "cube", "0", "1")
    assert code == 2


def test_grid_env_override(capsys, monkeypatch):
    monkeypatch.setenv("RELUCALC_GRID_DEFAULT", "321")
    from relucalc.cli import make_parser

    args = make_parser().parse_args(["build", "square"])
    assert args.grid == 321


def test_build_invalid_params_usage_error(capsys):
    code, _, stderr = run_cli(capsys, "build", "square", "--eps", "0.7")
    assert code == 2
    assert "invalid parameters" in stderr


def test_sweep_postcondition_violation_exit_code(capsys):
    # order-1 B-spline has jumps; its sup error against the indicator stays
    # near 1/2, breaching any small tolerance: the sweep must fail loudly
    code, stdout, stderr = run_cli(
        capsys,
        "sweep",
        "bspline",
        "--m",
        "1",
        "--eps-list",
        "0.01",
        "--grid",
        "2001",
    )
    assert code == 4
    assert "postcondition" in stderr
