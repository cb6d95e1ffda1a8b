"""CLI surface: subcommands, formats, outputs, exit codes."""

import json

from stratus.cli import main


def test_run_table_to_stdout(capsys):
    assert main(["run", "--config", "scenario_a"]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0].startswith("Cloudlet ID")
    assert lines[1].split() == ["4", "SUCCESS", "2", "4", "3", "0.2", "3.2"]
    assert "Completion rate: 1" in lines
    assert "Average execution time: 3.4" in lines


def test_run_table_second_scenario_rows(capsys):
    assert main(["run", "--config", "scenario_b"]) == 0
    lines = capsys.readouterr().out.splitlines()
    zero_row = next(line for line in lines if line.startswith("0 "))
    assert zero_row.split() == ["0", "SUCCESS", "2", "0", "14", "0.2", "14.2"]


def test_run_csv_to_file(tmp_path, capsys):
    out_path = tmp_path / "report.csv"
    assert main(["run", "--config", "scenario_a", "--format", "csv",
                 "--output", str(out_path)]) == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == "cloudlet_id,status,datacenter_id,vm_id,time,start,finish"
    assert len(lines) == 41
    assert lines[1] == "4,SUCCESS,2,4,3,0.2,3.2"
    # summary still reported, on stdout since the CSV went to a file
    assert "Completion rate: 1" in capsys.readouterr().out


def test_run_csv_to_stdout_keeps_stream_clean(capsys):
    assert main(["run", "--config", "scenario_a", "--format", "csv"]) == 0
    captured = capsys.readouterr()
    assert captured.out.splitlines()[0] == "cloudlet_id,status,datacenter_id,vm_id,time,start,finish"
    assert "Completion rate" not in captured.out
    assert "Completion rate: 1" in captured.err


def test_run_accepts_scenario_files(tmp_path, capsys):
    config = {
        "datacenters": [{"hosts": [{"pe_count": 1, "mips": 1000, "ram": 1024,
                                    "bw": 1000, "storage": 10000}]}],
        "vms": {"count": 1},
        "cloudlets": {"count": 1},
    }
    path = tmp_path / "one.json"
    path.write_text(json.dumps(config))
    assert main(["run", "--config", str(path)]) == 0
    out = capsys.readouterr().out
    assert "0            SUCCESS" in out


def test_trace_file_is_written(tmp_path, capsys):
    trace_path = tmp_path / "trace.tsv"
    assert main(["run", "--config", "scenario_a", "--trace", str(trace_path)]) == 0
    capsys.readouterr()
    lines = trace_path.read_text().splitlines()
    assert lines[0].split("\t")[3] == "REGISTER"
    times = [float(line.split("\t")[0]) for line in lines]
    assert times == sorted(times)
    assert lines[-1].split("\t")[3] == "END"


def test_validate_good_config(capsys):
    assert main(["validate", "--config", "scenario_b"]) == 0
    assert "OK" in capsys.readouterr().out


def test_validate_bad_config_exits_one(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"vms": {"count": -1}}))
    assert main(["validate", "--config", str(path)]) == 1
    assert "vms.count" in capsys.readouterr().err


def test_missing_config_exits_one(capsys):
    assert main(["run", "--config", "does_not_exist.json"]) == 1
    assert "error:" in capsys.readouterr().err


def test_sweep_writes_csv(tmp_path):
    out_path = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", "sweep_base", "--vms", "1..5",
                 "--output", str(out_path)]) == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == "vm_count,avg_exec_time,completion_rate"
    assert len(lines) == 6
    assert lines[1] == "1,40,1"


def test_sweep_rejects_bad_range(capsys):
    assert main(["sweep", "--config", "sweep_base", "--vms", "5"]) == 1
    assert "vms" in capsys.readouterr().err


def test_unwritable_output_exits_two(tmp_path, capsys):
    bad = tmp_path / "no" / "such" / "dir" / "out.txt"
    assert main(["run", "--config", "scenario_a", "--output", str(bad)]) == 2
    assert "error:" in capsys.readouterr().err


def test_config_output_paths_honored(tmp_path, capsys):
    config = {
        "datacenters": [{"hosts": [{"pe_count": 1, "mips": 1000, "ram": 1024,
                                    "bw": 1000, "storage": 10000}]}],
        "vms": {"count": 1},
        "cloudlets": {"count": 1},
        "outputs": {"format": "csv", "paths": {"csv": str(tmp_path / "auto.csv")}},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(config))
    assert main(["run", "--config", str(path)]) == 0
    capsys.readouterr()
    assert (tmp_path / "auto.csv").read_text().startswith("cloudlet_id,")
