import subprocess
import sys

import pytest

from conftest import FIXTURES
from smartregion.cli import main

TOPO = str(FIXTURES / "fig5.topo")
REGIONS = str(FIXTURES / "fig5.regions")
PAIR = ["--topology", TOPO, "--decomposition", REGIONS]


def cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_name_from_bits(capsys):
    assert cli(capsys, "name", "--bits", "1001010110110110", "0111011001100101") == (0, "ERI.INT\n", "")


def test_name_to_bits(capsys):
    code, out, _ = cli(capsys, "name", "--name", "ERI.INT")
    assert code == 0 and out == "1001010110110110 0111011001100101\n"


def test_decompose_star(capsys):
    code, out, _ = cli(capsys, "decompose", "--topology", str(FIXTURES / "star.topo"), "--variant", "disagg")
    assert code == 0
    assert out == "variant disagg\nregion 1 switches 1 nodes 2,3,4,5\n"


def test_decompose_writes_output_file(capsys, tmp_path):
    target = tmp_path / "out.regions"
    assert cli(capsys, "decompose", "--topology", TOPO, "--output", str(target))[0] == 0
    assert target.read_text().startswith("variant disagg\n")


def test_map(capsys):
    code, out, _ = cli(capsys, "map", *PAIR, "--origin", "3")
    assert code == 0
    assert "map 3: 1 -> 1 lat=100 loss=0 hops=1" in out.splitlines()


def test_map_instances(capsys):
    code, out, _ = cli(capsys, "map", *PAIR, "--origin", "3", "--instances")
    assert code == 0 and "5@P1" in out


def test_route_minimal(capsys):
    code, out, _ = cli(capsys, "route", *PAIR, "--region", "3", "--header", "80", "01", "00", "12")
    assert code == 0
    assert out == "action=ForwardInterRegion\nbranch next=1 egress=32 path={3,1} header=80 01 00 12\n"


def test_route_maximal_rewrites_stack(capsys):
    code, out, _ = cli(capsys, "route", *PAIR, "--region", "3", "--mode", "maximal",
                       "--header", "80 01 00 12")
    assert code == 0
    assert "path={3,1,8,7,18} header=80 04 00 01 00 08 00 07 00 12" in out


def test_route_dump_table(capsys):
    code, out, _ = cli(capsys, "route", *PAIR, "--region", "3", "--dump-table")
    assert code == 0
    assert "route 18 via 1 border 32\nroute 18 via 5 border 32\n" in out


def test_route_policy_file(capsys, tmp_path):
    pol = tmp_path / "policy.txt"
    pol.write_text("effort_mode=maximal\n")
    code, out, _ = cli(capsys, "route", *PAIR, "--region", "3", "--policy", str(pol), "--header", "80010012")
    assert code == 0 and "{3,1,8,7,18}" in out


def test_route_delivery(capsys):
    code, out, _ = cli(capsys, "route", *PAIR, "--region", "18", "--header",
                       "c0 01 00 12 00 04 a7 04 9d")
    assert code == 0 and out.startswith("action=DeliverLocal\ntargets=1181\n")


def test_header_round_trip(capsys):
    code, out, _ = cli(capsys, "encode-header", "--description",
                       "stack=18", "sender=1191", "receiver=1181", "pid=7", "fid=1")
    assert code == 0 and out == "c0 01 00 12 c0 00 70 01 04 a7 04 9d\n"
    code, desc, _ = cli(capsys, "decode-header", "--hex", out.strip())
    assert code == 0
    code, again, _ = cli(capsys, "encode-header", "--description", desc.strip())
    assert again == out


def test_decode_header_from_file(capsys, tmp_path):
    f = tmp_path / "h.hex"
    f.write_text("20 03 ff\n")
    code, out, _ = cli(capsys, "decode-header", "--input", str(f))
    assert code == 0 and "fission=3" in out and "# 1 trailing bytes" in out


def test_simulate_is_deterministic(capsys):
    scn = str(FIXTURES / "fig5_migration.scn")
    a = cli(capsys, "simulate", "--scenario", scn, "--seed", "42")
    b = cli(capsys, "simulate", "--scenario", scn, "--seed", "42")
    assert a == b and a[0] == 0
    assert a[1].startswith("metric,value\ninjected,200\ndelivered,200\n")


def test_nr2(capsys):
    code, out, _ = cli(capsys, "nr2", "--speed-kmh", "300", "--stream-mbps", "2.6", "--segment-mb", "10",
                       "--access-mbps", "50", "--compare-window", "8.2")
    assert code == 0
    lines = dict(l.split("=") for l in out.split())
    assert lines["survivable_gap_m"] == "2564.1"
    assert lines["access_window_s"] == "1.600"
    assert lines["compare_cell_diameter_m"] == "683.3"
    assert lines["power_saving"] == "0.9619"


@pytest.mark.parametrize("argv", [
    ["decode-header", "--hex", "80 02 00 01"],
    ["decode-header", "--hex", "zz"],
    ["encode-header", "--description", "stack=0"],
    ["name", "--name", "QQQ"],
    ["route", *PAIR, "--region", "42", "--dump-table"],
    ["route", *PAIR, "--region", "3"],
    ["simulate", "--scenario", "/nonexistent.scn"],
    ["nr2", "--speed-kmh", "0", "--stream-mbps", "1", "--segment-mb", "1", "--access-mbps", "1"],
    ["decompose", "--topology", "/nonexistent.topo"],
])
def test_domain_errors_exit_1(capsys, argv):
    code, out, err = cli(capsys, *argv)
    assert code == 1 and out == "" and err.startswith("smartregion: error:")


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["name"],
    ["name", "--bits", "1", "--name", "A"],
    ["decompose", "--topology", TOPO, "--bogus"],
    ["nr2", "--speed-kmh", "fast"],
])
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
    assert "usage:" in capsys.readouterr().err


def test_console_script_runs():
    r = subprocess.run([sys.executable, "-m", "smartregion.cli", "name", "--name", "SNE-ERI"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout == "0111011001100100 1101010110011100\n"
