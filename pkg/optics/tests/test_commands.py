import re
from io import StringIO

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from optics.management.commands._base import format_vector


def run_command(*args):
    out = StringIO()
    call_command(*args, stdout=out)
    return out.getvalue().splitlines()


@pytest.fixture
def axial_rig_file(tmp_path):
    path = tmp_path / "axial.ini"
    path.write_text(
        "[mirror]\nA = 1\nB = 0\nC = 1\n\n"
        "[camera]\ncx_world = 0\ncy_world = 0\ncz_world = 3\n"
    )
    return str(path)


@pytest.fixture
def sweep_file(tmp_path):
    path = tmp_path / "sweep.ini"
    path.write_text("[noise]\nkind = pixel\nlevels = 0, 1\ntrials = 3\nseed = 2\n")
    return str(path)


def test_format_vector():
    assert format_vector([1.0, 0.5, -2.0]) == "(1, 0.5, -2)"


def test_vp_command():
    lines = run_command("vp", "--dir=0.3,0.5,0.8")

    assert lines[0] == "configuration: general (eliminant degree 10)"
    assert any(line.startswith("r=(") for line in lines[1:])


def test_vp_command_with_rig_file(axial_rig_file):
    lines = run_command("vp", "--dir=1,0,1", "--rig", axial_rig_file)

    assert lines[0] == "configuration: spherical_axial (eliminant degree 4)"
    assert len([line for line in lines if line.startswith("r=")]) == 2


def test_vp_command_on_degenerate_direction(axial_rig_file):
    lines = run_command("vp", "--dir=0,0,1", "--rig", axial_rig_file)

    assert "is degenerate" in lines[1]
    assert lines[2].startswith("r=(")
    assert len(lines) == 3


def test_vp_command_on_central_rig():
    lines = run_command("vp", "--dir=0.2,0.1,-1", "--rig=central-hyperbolic")

    assert lines[0] == "configuration: central_hyperbolic"


@pytest.mark.slow
def test_vp_command_with_oracle(axial_rig_file):
    lines = run_command("vp", "--dir=1,0,1", "--rig", axial_rig_file, "--oracle")

    assert len([line for line in lines if line.startswith("oracle: r=")]) == 2


@pytest.mark.parametrize(
    "args",
    [
        ("vp", "--dir=1,0,1", "--rig=parabolic"),
        ("vp", "--dir=1,0,1", "--rig=missing.ini"),
        ("direction", "--point=0,0.5,0.5", "--rig=spherical"),
        ("curve", "--normal=0,0,1", "--step=0"),
    ],
)
def test_invalid_input_exits_with_two(args):
    with pytest.raises(CommandError) as excinfo:
        run_command(*args)

    assert excinfo.value.returncode == 2


def test_malformed_vector_is_rejected():
    with pytest.raises(CommandError):
        run_command("vp", "--dir=1,0")


def test_direction_command(axial_rig_file):
    lines = run_command("direction", "--point=0,0,1", "--rig", axial_rig_file)

    directions = [[float(x) for x in line[3:-1].split(", ")] for line in lines]

    assert len(directions) == 2
    assert sorted(abs(d[2]) for d in directions) == [1.0, 1.0]
    assert directions[0][2] == -directions[1][2]


def test_curve_command(axial_rig_file, tmp_path):
    output = tmp_path / "curve.csv"

    lines = run_command(
        "curve", "--normal=0,0,1", "--rig", axial_rig_file, "--output", str(output)
    )

    assert re.match(r"normal \(0, 0, 1\): 1 segment\(s\), \d+ samples", lines[0])
    assert lines[1].startswith("segment 0: closed")
    rows = output.read_text().splitlines()
    assert rows[0] == "segment,x,y,z"
    assert len(rows) > 10
    assert all(row.startswith("0,") for row in rows[1:])


def test_pose_command(tmp_path):
    scene = tmp_path / "scene.ini"
    scene.write_text("[mirror]\npreset = spherical\n\n[scene]\nseed = 4\nnoise = 0\n")

    lines = run_command("pose", "--scene", str(scene))

    assert [line.split(" ")[0] for line in lines[:4]] == ["R", "R", "R", "t"]
    assert float(lines[4].rpartition(" ")[2]) < 1e-6
    assert float(lines[5].rpartition(" ")[2]) < 1e-4


def test_pose_command_needs_scene_section(axial_rig_file):
    with pytest.raises(CommandError) as excinfo:
        run_command("pose", "--scene", axial_rig_file)

    assert excinfo.value.returncode == 2


def test_sweep_command(sweep_file, tmp_path):
    output_dir = tmp_path / "out"

    lines = run_command(
        "sweep",
        "--experiment=dir-from-vp",
        "--config",
        sweep_file,
        "--rig=spherical",
        "--output-dir",
        str(output_dir),
    )

    assert lines[0].startswith("dir-from-vp spherical: medians ")
    assert lines[1:] == [
        "wrote %s" % (output_dir / "dir-from-vp_spherical.csv"),
        "wrote %s" % (output_dir / "dir-from-vp.svg"),
    ]


@pytest.mark.parametrize(
    "extra",
    [
        ("--experiment=dir-from-vp", "--trials=0"),
        ("--experiment=vp-from-dir",),
    ],
)
def test_sweep_command_rejects(sweep_file, tmp_path, extra):
    with pytest.raises(CommandError) as excinfo:
        run_command(
            "sweep",
            "--config",
            sweep_file,
            "--rig=spherical",
            "--output-dir",
            str(tmp_path),
            *extra,
        )

    assert excinfo.value.returncode == 2


def test_oracle_check_reports_mismatches(monkeypatch):
    monkeypatch.setattr(
        "optics.management.commands.oracle_check.vp_oracle",
        lambda rig, s, limit=None: [],
    )

    with pytest.raises(CommandError) as excinfo:
        run_command("oracle_check", "--trials=2", "--rig=spherical")

    assert excinfo.value.returncode == 3
