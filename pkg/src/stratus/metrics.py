"""Aggregate metrics, per-cloudlet cost accounting and report rendering.

Records are ordered by (finish, vm id, cloudlet id) so rendered tables
and CSV exports are byte-stable across runs. Cell times print with up
to two decimals, trailing zeros trimmed; summary values print at full
precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .entities import Cloudlet, CloudletStatus, DatacenterCharacteristics, Vm

TABLE_COLUMNS = ("Cloudlet ID", "Status", "Data center ID", "VM ID",
                 "Time", "Start Time", "Finish Time")
CSV_HEADER = "cloudlet_id,status,datacenter_id,vm_id,time,start,finish"
SWEEP_CSV_HEADER = "vm_count,avg_exec_time,completion_rate"


class EmptyMetricError(ValueError):
    """Raised when a ratio or mean is requested over zero records."""


@dataclass(frozen=True)
class CloudletRecord:
    cloudlet_id: int
    status: str
    datacenter_id: Optional[int]
    vm_id: Optional[int]
    time: Optional[float]
    start: Optional[float]
    finish: Optional[float]

    def sort_key(self):
        inf = float("inf")
        return (self.finish if self.finish is not None else inf,
                self.vm_id if self.vm_id is not None else inf,
                self.cloudlet_id)


@dataclass
class SimulationReport:
    records: list[CloudletRecord]
    completion_rate: Optional[float]
    avg_exec_time: Optional[float]
    total_cost: float
    energy: float = 0.0
    migrations: int = 0
    final_clock: float = 0.0
    backend: str = ""


def record_for(cloudlet: Cloudlet) -> CloudletRecord:
    if cloudlet.status is CloudletStatus.SUCCESS:
        time = cloudlet.finish - cloudlet.exec_start
    else:
        time = None
    return CloudletRecord(cloudlet.id, cloudlet.status.value, cloudlet.datacenter,
                          cloudlet.bound_vm, time, cloudlet.exec_start, cloudlet.finish)


def completion_rate(records: list[CloudletRecord]) -> float:
    """Fraction of records that finished with SUCCESS status."""
    if not records:
        raise EmptyMetricError("completion rate undefined over zero records")
    succeeded = sum(1 for r in records if r.status == CloudletStatus.SUCCESS.value)
    return succeeded / len(records)


def average_execution_time(records: list[CloudletRecord]) -> float:
    """Mean execution time over the SUCCESS records."""
    times = [r.time for r in records if r.status == CloudletStatus.SUCCESS.value]
    if not times:
        raise EmptyMetricError("average execution time undefined with zero successes")
    return sum(times) / len(times)


def total_cost(records: list[CloudletRecord],
               prices_by_datacenter: dict[int, DatacenterCharacteristics],
               vms_by_id: dict[int, Vm],
               cloudlets_by_id: dict[int, Cloudlet]) -> float:
    """Sum per-cloudlet charges: CPU seconds, transferred bytes, memory
    held over the execution and the VM image footprint."""
    cost = 0.0
    for record in records:
        if record.status != CloudletStatus.SUCCESS.value:
            continue
        prices = prices_by_datacenter[record.datacenter_id].prices
        vm = vms_by_id[record.vm_id]
        cloudlet = cloudlets_by_id[record.cloudlet_id]
        cost += (prices.per_cpu_second * record.time
                 + prices.per_bw_unit * (cloudlet.file_size + cloudlet.output_size)
                 + prices.per_mem_unit * vm.ram * record.time
                 + prices.per_storage_unit * vm.image_size)
    return cost


def build_report(cloudlets: list[Cloudlet],
                 datacenters_by_id: dict[int, DatacenterCharacteristics],
                 vms_by_id: dict[int, Vm],
                 energy: float = 0.0, migrations: int = 0,
                 final_clock: float = 0.0, backend: str = "") -> SimulationReport:
    records = sorted((record_for(c) for c in cloudlets), key=CloudletRecord.sort_key)
    try:
        rate = completion_rate(records)
    except EmptyMetricError:
        rate = None
    try:
        avg = average_execution_time(records)
    except EmptyMetricError:
        avg = None
    cloudlets_by_id = {c.id: c for c in cloudlets}
    cost = total_cost(records, datacenters_by_id, vms_by_id, cloudlets_by_id)
    return SimulationReport(records, rate, avg, cost, energy, migrations,
                            final_clock, backend)


# -- rendering ----------------------------------------------------------------


def fmt_time(value: Optional[float]) -> str:
    """Up to two decimal places, trailing zeros trimmed: 3, 0.2, 12.99."""
    if value is None:
        return "-"
    text = f"{value:.2f}".rstrip("0").rstrip(".")
    return text if text else "0"


def fmt_full(value: float) -> str:
    """Full precision, integral values without the trailing .0."""
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def summary_lines(report: SimulationReport) -> list[str]:
    if report.completion_rate is None:
        lines = ["Completion rate: undefined (no cloudlets)"]
    else:
        lines = [f"Completion rate: {fmt_full(report.completion_rate)}"]
    if report.avg_exec_time is None:
        lines.append("Average execution time: undefined (no successful cloudlets)")
    else:
        lines.append(f"Average execution time: {fmt_full(report.avg_exec_time)}")
    lines.append(f"Total cost: {fmt_full(report.total_cost)}")
    if report.energy or report.migrations:
        lines.append(f"Energy: {fmt_full(report.energy)} J")
        lines.append(f"Migrations: {report.migrations}")
    return lines


def _row_cells(record: CloudletRecord) -> tuple[str, ...]:
    return (str(record.cloudlet_id),
            record.status,
            "-" if record.datacenter_id is None else str(record.datacenter_id),
            "-" if record.vm_id is None else str(record.vm_id),
            fmt_time(record.time),
            fmt_time(record.start),
            fmt_time(record.finish))


def render_table(report: SimulationReport) -> str:
    """Fixed-width table in the canonical column order plus summary."""
    rows = [_row_cells(r) for r in report.records]
    widths = [max(len(TABLE_COLUMNS[i]), *(len(row[i]) for row in rows)) if rows
              else len(TABLE_COLUMNS[i]) for i in range(len(TABLE_COLUMNS))]
    out = ["  ".join(name.ljust(widths[i]) for i, name in enumerate(TABLE_COLUMNS)).rstrip()]
    for row in rows:
        out.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    out.append("")
    out.extend(summary_lines(report))
    return "\n".join(out) + "\n"


def render_csv(report: SimulationReport) -> str:
    lines = [CSV_HEADER]
    for r in report.records:
        lines.append(",".join((str(r.cloudlet_id), r.status,
                               "" if r.datacenter_id is None else str(r.datacenter_id),
                               "" if r.vm_id is None else str(r.vm_id),
                               fmt_time(r.time) if r.time is not None else "",
                               fmt_time(r.start) if r.start is not None else "",
                               fmt_time(r.finish) if r.finish is not None else "")))
    return "\n".join(lines) + "\n"


def render_sweep_csv(rows: list[tuple[int, Optional[float], Optional[float]]]) -> str:
    lines = [SWEEP_CSV_HEADER]
    for vm_count, avg, rate in rows:
        lines.append(",".join((str(vm_count),
                               "nan" if avg is None else fmt_full(avg),
                               "nan" if rate is None else fmt_full(rate))))
    return "\n".join(lines) + "\n"
